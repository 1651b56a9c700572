use proptest::prelude::*;
use thematic_core::textprep::{BowDoc, Dictionary};
use thematic_core::topicmodel::rng::Xoshiro256;
use thematic_core::topicmodel::{train_lda, GibbsTrainer, LdaConfig, LdaModel};
use thematic_core::Error;

const WORDS: [&str; 10] = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"];

fn dictionary() -> Dictionary {
    Dictionary::build(&[WORDS.iter().map(|w| w.to_string()).collect::<Vec<_>>()]).unwrap()
}

/// 50 documents over ids 0..5 followed by 50 over ids 5..10.
fn separable(seed: u64, len: usize) -> Vec<BowDoc> {
    let mut rng = Xoshiro256::seed_from_u64(seed);
    (0..100)
        .map(|d| {
            let base = if d < 50 { 0 } else { 5 };
            let ids: Vec<u32> = (0..len).map(|_| base + rng.below(5) as u32).collect();
            BowDoc::from_ids(format!("d{d}"), ids)
        })
        .collect()
}

fn config(n: usize, seed: u64) -> LdaConfig {
    LdaConfig::new(n).with_seed(seed)
}

fn short(n: usize, seed: u64, train_iters: usize) -> LdaConfig {
    let mut c = config(n, seed);
    c.train_iters = train_iters;
    c.burn_in = 10;
    c
}

/// Share of each topic's five highest-count words that fall in the topic's
/// majority block, computed straight from the count matrix.
fn purity(model: &LdaModel) -> f64 {
    let mut total = 0.0;
    for k in 0..model.num_topics() {
        let mut counts: Vec<(u32, usize)> = (0..10).map(|w| (model.topic_word_count(k, w), w)).collect();
        counts.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let top: Vec<usize> = counts[..5].iter().map(|c| c.1).collect();
        let low = top.iter().filter(|&&w| w < 5).count();
        total += low.max(5 - low) as f64 / 5.0;
        assert_eq!(
            model.top_words(k, 5),
            top.iter().map(|&w| w as u32).collect::<Vec<_>>()
        );
    }
    total / model.num_topics() as f64
}

#[test]
fn counts_are_conserved_after_every_sweep() {
    let corpus = separable(1, 25);
    let cfg = short(4, 7, 30);
    let mut tr = GibbsTrainer::new(&corpus, 10, cfg).unwrap();
    let total: usize = corpus.iter().map(BowDoc::total).sum();
    for _ in 0..30 {
        tr.sweep();
        for d in 0..tr.num_docs() {
            let s: u32 = (0..4).map(|k| tr.doc_topic_count(d, k)).sum();
            assert_eq!(s as usize, tr.doc_len(d));
        }
        for k in 0..4 {
            let s: u64 = (0..10).map(|w| tr.topic_word_count(k, w) as u64).sum();
            assert_eq!(s, tr.topic_totals()[k]);
        }
        assert_eq!(tr.topic_totals().iter().sum::<u64>() as usize, total);
    }
}

#[test]
fn separable_corpus_gives_pure_topics() {
    let corpus = separable(3, 20);
    let model = train_lda(&corpus, &dictionary(), config(2, 11)).unwrap();
    let p = purity(&model);
    assert!(p >= 0.9, "purity {p}");

    // 20 tokens from the first block load on the topic that owns it
    let doc = BowDoc::from_ids("q", (0..20).map(|i| (i % 5) as u32));
    let theta = model.infer(&doc, 5);
    let k = if model.topic_word_count(0, 0) > model.topic_word_count(1, 0) { 0 } else { 1 };
    assert!(theta.0[k] > 0.9, "{:?}", theta.0);
}

#[test]
fn log_likelihood_improves_on_separable_corpus() {
    let corpus = separable(5, 20);
    let mut tr = GibbsTrainer::new(&corpus, 10, config(2, 5)).unwrap();
    let mut ll = Vec::new();
    for _ in 0..100 {
        tr.sweep();
        ll.push(tr.log_likelihood());
    }
    let first: f64 = ll[..10].iter().sum::<f64>() / 10.0;
    let last: f64 = ll[90..].iter().sum::<f64>() / 10.0;
    assert!(last > first, "{first} -> {last}");
}

#[test]
fn training_and_inference_are_reproducible() {
    let corpus = separable(8, 15);
    let mut cfg = short(3, 99, 40);
    let a = train_lda(&corpus, &dictionary(), cfg.clone()).unwrap();
    let b = train_lda(&corpus, &dictionary(), cfg.clone()).unwrap();
    assert_eq!(a, b);
    let doc = &corpus[7];
    assert_eq!(a.infer(doc, 1), b.infer(doc, 1));
    assert_eq!(a.infer(doc, 1).0, a.infer(doc, 1).0);
    cfg.seed = 100;
    assert_ne!(a, train_lda(&corpus, &dictionary(), cfg).unwrap());
}

#[test]
fn empty_document_returns_the_uniform_prior() {
    let model = train_lda(&separable(2, 10), &dictionary(), config(5, 0)).unwrap();
    let theta = model.infer(&BowDoc::default(), 42);
    assert_eq!(theta.0, vec![0.2; 5]);
}

#[test]
fn single_token_corpus() {
    let mut cfg = config(2, 0);
    cfg.train_iters = 1;
    cfg.burn_in = 0;
    cfg.infer_iters = 1;
    let mut tr = GibbsTrainer::new(&[BowDoc::from_ids("x", [0])], 1, cfg).unwrap();
    tr.run();
    assert_eq!(tr.topic_totals().iter().sum::<u64>(), 1);
}

#[test]
fn save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    let cfg = short(3, 4, 20);
    let model = train_lda(&separable(1, 10), &dictionary(), cfg).unwrap();
    model.save(&path).unwrap();
    assert_eq!(LdaModel::load(&path, &dictionary()).unwrap(), model);

    let other = Dictionary::build(&[vec!["zz".to_string()]]).unwrap();
    assert!(matches!(LdaModel::load(&path, &other), Err(Error::DictionaryMismatch { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inferred_distributions_are_positive_and_normalized(
        ids in prop::collection::vec(0u32..12, 0..60),
        seed in any::<u64>(),
    ) {
        static MODEL: std::sync::OnceLock<LdaModel> = std::sync::OnceLock::new();
        let model = MODEL.get_or_init(|| {
            train_lda(&separable(4, 12), &dictionary(), short(6, 1, 30)).unwrap()
        });
        let theta = model.infer(&BowDoc::from_ids("p", ids), seed);
        prop_assert_eq!(theta.len(), 6);
        prop_assert!(theta.0.iter().all(|&p| p > 0.0));
        prop_assert!((theta.0.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}
