use thematic_core::corpus::{split_document, Split};
use thematic_core::pipeline::{
    self, analyze, filter_counts, make_synthetic, prepare, run_experiment, train_models, ExperimentConfig,
    SyntheticSpec,
};
use thematic_core::textprep::segment_sentences;
use thematic_core::{Document, Label, Metric};

fn small_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        l_values: vec![5],
        n_values: vec![10],
        seed,
        ..Default::default()
    }
}

#[test]
fn synthetic_shift_is_detected() {
    let docs = make_synthetic(&SyntheticSpec::new(60, 10, 11)).unwrap();
    let report = run_experiment(&docs, &small_config(11)).unwrap();
    assert_eq!(report.cells.len(), 3);
    for cell in &report.cells {
        let t = cell.test.as_ref().expect("test present");
        let (f, r) = (cell.fake.as_ref().unwrap(), cell.real.as_ref().unwrap());
        assert!(f.mean > r.mean, "{:?}: {} vs {}", cell.metric, f.mean, r.mean);
        assert!(t.p < 0.01, "{:?}: p = {}", cell.metric, t.p);
    }
}

#[test]
fn grid_is_complete_and_deterministic() {
    let docs = make_synthetic(&SyntheticSpec::new(12, 8, 2)).unwrap();
    let mut cfg = small_config(5);
    cfg.l_values = vec![1, 3];
    cfg.n_values = vec![2, 4];
    cfg.metrics = vec![Metric::Chebyshev, Metric::SquaredEuclidean];
    cfg.lda.train_iters = 60;
    cfg.lda.infer_iters = 30;
    cfg.lda.burn_in = 10;
    let a = run_experiment(&docs, &cfg).unwrap();
    assert_eq!(a.cells.len(), 2 * 2 * 2);
    assert_eq!(a.records.len(), 2 * 2 * docs.len());
    let b = run_experiment(&docs, &cfg).unwrap();
    assert_eq!(a, b);
    let js = |r| serde_json::to_string(r).unwrap();
    assert_eq!(js(&a), js(&b));
}

#[test]
fn filtering_matches_the_split_rule() {
    let mut docs = Vec::new();
    for (i, n) in [2usize, 3, 4, 5, 6, 7, 3, 6].iter().enumerate() {
        let text: Vec<String> = (0..*n).map(|j| format!("Sentence number{j} about topic{i} here.")).collect();
        let label = if i % 2 == 0 { Label::Fake } else { Label::Real };
        docs.push(Document::new(format!("d{i}"), label, text.join(" ")));
    }
    let mut cfg = ExperimentConfig {
        n_values: vec![2],
        ..Default::default()
    };
    cfg.lda.train_iters = 20;
    cfg.lda.infer_iters = 20;
    cfg.lda.burn_in = 5;
    let prepared = prepare(&docs, &cfg.textprep).unwrap();
    let counts = filter_counts(&prepared, &cfg.l_values).unwrap();
    let models = train_models(&prepared, &cfg).unwrap();
    let records = analyze(&prepared, &models, &cfg.l_values, 0).unwrap();

    let mut previous = 0;
    for c in &counts {
        let expected: Vec<String> = docs
            .iter()
            .filter_map(|d| {
                let mut d = d.clone();
                d.sentences = segment_sentences(&d.text);
                match split_document(&d, c.l).unwrap() {
                    Split::Kept(s) => Some(s.doc_id),
                    Split::Filtered => None,
                }
            })
            .collect();
        let got: Vec<&str> = records.iter().filter(|r| r.l == c.l).map(|r| r.doc_id.as_str()).collect();
        assert_eq!(got, expected, "l={}", c.l);
        assert_eq!(c.kept_fake + c.kept_real, expected.len());
        assert!(c.filtered() >= previous);
        previous = c.filtered();
    }
}

#[test]
fn too_few_documents_gives_skip_reasons() {
    let docs = make_synthetic(&SyntheticSpec::new(1, 8, 0)).unwrap();
    let mut cfg = small_config(0);
    cfg.lda.train_iters = 20;
    cfg.lda.infer_iters = 20;
    cfg.lda.burn_in = 5;
    let report = run_experiment(&docs, &cfg).unwrap();
    for c in &report.cells {
        assert!(c.test.is_none());
        assert!(c.skip_reason.as_deref().unwrap().contains("fewer than 2"));
        assert!(c.fake.is_some() && c.real.is_some());
    }
}

#[test]
fn identical_segments_give_small_divergences() {
    // opening and remainder repeat the same sentence
    let mut docs = Vec::new();
    for i in 0..10 {
        let words = if i % 2 == 0 { "Striker penalty stadium referee" } else { "Dividend mortgage equity bond" };
        let text = vec![format!("{words} trophy ledger."); 2].join(" ");
        let label = if i < 5 { Label::Fake } else { Label::Real };
        docs.push(Document::new(format!("d{i}"), label, text));
    }
    let mut cfg = small_config(3);
    cfg.l_values = vec![1];
    cfg.n_values = vec![4];
    let report = run_experiment(&docs, &cfg).unwrap();
    for r in &report.records {
        assert!(r.d_ch < 0.35, "{r:?}");
    }
    for c in &report.cells {
        if let Some(t) = &c.test {
            assert!(t.p > 0.01, "{:?}", c);
        }
    }
}

#[test]
fn ranking_over_a_cell() {
    let docs = make_synthetic(&SyntheticSpec::new(8, 8, 9)).unwrap();
    let mut cfg = small_config(9);
    cfg.lda.train_iters = 50;
    let report = run_experiment(&docs, &cfg).unwrap();
    let ranks = pipeline::rank_articles(&report.records, Metric::Chebyshev, 5);
    for c in &ranks {
        assert_eq!(c.top.len(), 5);
        assert_eq!(c.bottom.len(), 5);
        assert!(c.top[0].value >= c.top[4].value);
        assert!(c.bottom[0].value <= c.bottom[4].value);
    }
}
