//! The experiment grid: preprocessing, one LDA model per topic count,
//! per-article divergences for every opening length, per-class summaries and
//! t-tests.

mod output;
mod rank;
mod synthetic;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{check_opening_len, corpus_hash, split_at_opening, Document, Label};
use crate::divergence::{aggregate, ClassAggregate, DivergenceRecord, Metric};
use crate::stats::{self, TTestOptions, TTestResult};
use crate::textprep::{BowDoc, Dictionary, TextPipeline, TextPrepConfig};
use crate::topicmodel::{self, LdaConfig, LdaModel};
use crate::{Error, Result};

pub use output::{
    read_prepared, write_aggregates, write_filtered, write_prepared, write_report, write_tests,
    AGGREGATE_COLUMNS, FILTERED_COLUMNS, TEST_COLUMNS,
};
pub use rank::{rank_articles, ClassRanking, RankedArticle};
pub use synthetic::{make_synthetic, SyntheticSpec, FINANCE_WORDS, SPORTS_WORDS};

pub const DEFAULT_L_VALUES: [usize; 5] = [1, 2, 3, 4, 5];
pub const DEFAULT_N_VALUES: [usize; 8] = [10, 20, 30, 40, 50, 100, 150, 200];

/// LDA settings shared by every topic count. `alpha = None` means `1/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaTemplate {
    pub alpha: Option<f64>,
    pub beta: f64,
    pub train_iters: usize,
    pub infer_iters: usize,
    pub burn_in: usize,
}

impl Default for LdaTemplate {
    fn default() -> Self {
        LdaTemplate {
            alpha: None,
            beta: topicmodel::DEFAULT_BETA,
            train_iters: topicmodel::DEFAULT_TRAIN_ITERS,
            infer_iters: topicmodel::DEFAULT_INFER_ITERS,
            burn_in: topicmodel::DEFAULT_BURN_IN,
        }
    }
}

impl LdaTemplate {
    pub fn config(&self, num_topics: usize, seed: u64) -> LdaConfig {
        let mut c = LdaConfig::new(num_topics).with_seed(seed);
        if let Some(a) = self.alpha {
            c.alpha = a;
        }
        c.beta = self.beta;
        c.train_iters = self.train_iters;
        c.infer_iters = self.infer_iters;
        c.burn_in = self.burn_in;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub l_values: Vec<usize>,
    pub n_values: Vec<usize>,
    pub lda: LdaTemplate,
    pub metrics: Vec<Metric>,
    pub seed: u64,
    pub test: TTestOptions,
    pub textprep: TextPrepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            l_values: DEFAULT_L_VALUES.to_vec(),
            n_values: DEFAULT_N_VALUES.to_vec(),
            lda: LdaTemplate::default(),
            metrics: Metric::ALL.to_vec(),
            seed: 0,
            test: TTestOptions::default(),
            textprep: TextPrepConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l_values.is_empty() {
            return Err(Error::Config("l_values must not be empty".into()));
        }
        for &l in &self.l_values {
            check_opening_len(l)?;
        }
        if self.n_values.is_empty() {
            return Err(Error::Config("n_values must not be empty".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::Config("at least one metric must be selected".into()));
        }
        for &n in &self.n_values {
            self.lda.config(n, 0).validate()?;
        }
        let mut seen = std::collections::HashSet::new();
        if !self.l_values.iter().all(|l| seen.insert(*l)) {
            return Err(Error::Config("l_values contains duplicates".into()));
        }
        seen.clear();
        if !self.n_values.iter().all(|n| seen.insert(*n)) {
            return Err(Error::Config("n_values contains duplicates".into()));
        }
        Ok(())
    }
}

/// Sub-seed for a grid coordinate: the first 8 bytes (little endian) of
/// SHA-256 over the master seed and the length-prefixed coordinates.
pub fn derive_seed(master: u64, coords: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for c in coords {
        h.update((c.len() as u64).to_le_bytes());
        h.update(c.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub fn training_seed(master: u64, num_topics: usize) -> u64 {
    derive_seed(master, &["train", &num_topics.to_string()])
}

pub fn inference_seed(master: u64, l: usize, num_topics: usize, doc_id: &str, segment: &str) -> u64 {
    derive_seed(master, &["infer", &l.to_string(), &num_topics.to_string(), doc_id, segment])
}

/// Article after preprocessing: dictionary ids of each sentence's tokens.
/// Sentences with no surviving tokens are kept as empty lists so that the
/// sentence count matches segmentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreparedDoc {
    pub id: String,
    pub label: Label,
    pub sentences: Vec<Vec<u32>>,
}

impl PreparedDoc {
    pub fn bow(&self) -> BowDoc {
        BowDoc::from_ids(self.id.clone(), self.sentences.iter().flatten().copied())
    }

    pub fn bow_of(&self, sentences: &[Vec<u32>]) -> BowDoc {
        BowDoc::from_ids(self.id.clone(), sentences.iter().flatten().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedCorpus {
    pub corpus_hash: String,
    pub dictionary: Dictionary,
    pub docs: Vec<PreparedDoc>,
}

impl PreparedCorpus {
    pub fn count(&self, label: Label) -> usize {
        self.docs.iter().filter(|d| d.label == label).count()
    }
}

pub fn prepare(corpus: &[Document], textprep: &TextPrepConfig) -> Result<PreparedCorpus> {
    if corpus.is_empty() {
        return Err(Error::Validation("corpus is empty".into()));
    }
    let pipeline = TextPipeline::new(textprep.clone())?;
    let texts: Vec<&str> = corpus.iter().map(|d| d.text.as_str()).collect();
    let (processed, dictionary) = pipeline.process_corpus(&texts)?;
    let docs = corpus
        .iter()
        .zip(&processed)
        .map(|(d, p)| PreparedDoc {
            id: d.id.clone(),
            label: d.label,
            sentences: p
                .tokens
                .iter()
                .map(|s| dictionary.ids_of(s).collect())
                .collect(),
        })
        .collect();
    Ok(PreparedCorpus {
        corpus_hash: corpus_hash(corpus),
        dictionary,
        docs,
    })
}

/// One model per topic count, trained on whole articles. Trainings run in
/// parallel; each is single-threaded and seeded from its own sub-seed.
pub fn train_models(prepared: &PreparedCorpus, config: &ExperimentConfig) -> Result<Vec<LdaModel>> {
    let bows: Vec<BowDoc> = prepared.docs.iter().map(PreparedDoc::bow).collect();
    config
        .n_values
        .par_iter()
        .map(|&n| {
            let lda = config.lda.config(n, training_seed(config.seed, n));
            log::info!("training LDA with N={n}");
            topicmodel::train_lda(&bows, &prepared.dictionary, lda)
        })
        .collect()
}

/// Documents kept and filtered at one opening length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterCount {
    pub l: usize,
    pub kept_fake: usize,
    pub kept_real: usize,
    pub filtered_fake: usize,
    pub filtered_real: usize,
}

impl FilterCount {
    pub fn kept(&self, label: Label) -> usize {
        match label {
            Label::Fake => self.kept_fake,
            Label::Real => self.kept_real,
        }
    }

    pub fn filtered(&self) -> usize {
        self.filtered_fake + self.filtered_real
    }
}

pub fn filter_counts(prepared: &PreparedCorpus, l_values: &[usize]) -> Result<Vec<FilterCount>> {
    l_values
        .iter()
        .map(|&l| {
            check_opening_len(l)?;
            let mut c = FilterCount {
                l,
                kept_fake: 0,
                kept_real: 0,
                filtered_fake: 0,
                filtered_real: 0,
            };
            for d in &prepared.docs {
                let kept = d.sentences.len() > l;
                match (d.label, kept) {
                    (Label::Fake, true) => c.kept_fake += 1,
                    (Label::Real, true) => c.kept_real += 1,
                    (Label::Fake, false) => c.filtered_fake += 1,
                    (Label::Real, false) => c.filtered_real += 1,
                }
            }
            Ok(c)
        })
        .collect()
}

/// Divergence records for every `(l, N)` cell, ordered by `l`, then `N`
/// (in model order), then corpus order.
pub fn analyze(
    prepared: &PreparedCorpus,
    models: &[LdaModel],
    l_values: &[usize],
    master_seed: u64,
) -> Result<Vec<DivergenceRecord>> {
    let dict_hash = prepared.dictionary.content_hash();
    for m in models {
        if m.dictionary_hash() != dict_hash {
            return Err(Error::DictionaryMismatch {
                expected: m.dictionary_hash().to_string(),
                found: dict_hash,
            });
        }
    }
    let mut records = Vec::new();
    for &l in l_values {
        check_opening_len(l)?;
        for model in models {
            let n = model.num_topics();
            let cell: Vec<Option<DivergenceRecord>> = prepared
                .docs
                .par_iter()
                .map(|d| -> Result<Option<DivergenceRecord>> {
                    let Some((opening, remainder)) = split_at_opening(&d.sentences, l)? else {
                        return Ok(None);
                    };
                    let p = model.infer(&d.bow_of(opening), inference_seed(master_seed, l, n, &d.id, "opening"));
                    let q = model.infer(
                        &d.bow_of(remainder),
                        inference_seed(master_seed, l, n, &d.id, "remainder"),
                    );
                    DivergenceRecord::compute(d.id.clone(), d.label, l, p.as_slice(), q.as_slice()).map(Some)
                })
                .collect::<Result<_>>()?;
            records.extend(cell.into_iter().flatten());
        }
    }
    Ok(records)
}

/// One `(metric, l, N)` cell of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub metric: Metric,
    pub l: usize,
    pub n_topics: usize,
    pub fake: Option<ClassAggregate>,
    pub real: Option<ClassAggregate>,
    pub test: Option<TTestResult>,
    pub skip_reason: Option<String>,
}

impl Cell {
    pub fn aggregate(&self, label: Label) -> Option<&ClassAggregate> {
        match label {
            Label::Fake => self.fake.as_ref(),
            Label::Real => self.real.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: ExperimentConfig,
    pub corpus_hash: String,
    pub dictionary_hash: String,
    pub vocab_size: usize,
    pub documents: usize,
    /// `(N, seed)` for every trained model.
    pub training_seeds: Vec<(usize, u64)>,
    pub inference_seed_rule: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub cells: Vec<Cell>,
    pub records: Vec<DivergenceRecord>,
    pub filtered: Vec<FilterCount>,
    /// Absent when the report is rebuilt from saved records.
    pub provenance: Option<Provenance>,
}

impl ExperimentReport {
    pub fn cell(&self, metric: Metric, l: usize, n_topics: usize) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.metric == metric && c.l == l && c.n_topics == n_topics)
    }

    pub fn aggregates(&self) -> impl Iterator<Item = &ClassAggregate> {
        self.cells
            .iter()
            .flat_map(|c| c.fake.iter().chain(c.real.iter()))
    }
}

/// Builds the cells of the grid from records. A cell is skipped when a class
/// has fewer than two documents or when the test is undefined.
pub fn build_cells(
    records: &[DivergenceRecord],
    config: &ExperimentConfig,
) -> Result<Vec<Cell>> {
    let aggs = aggregate(records, &config.metrics)?;
    let mut by_key: BTreeMap<(Metric, usize, usize, Label), ClassAggregate> = aggs
        .into_iter()
        .map(|a| ((a.metric, a.l, a.n_topics, a.label), a))
        .collect();
    let mut samples: BTreeMap<(usize, usize, Label), Vec<&DivergenceRecord>> = BTreeMap::new();
    for r in records {
        samples.entry((r.l, r.n_topics, r.label)).or_default().push(r);
    }
    let mut cells = Vec::new();
    for &metric in &config.metrics {
        for &l in &config.l_values {
            for &n in &config.n_values {
                let fake = by_key.remove(&(metric, l, n, Label::Fake));
                let real = by_key.remove(&(metric, l, n, Label::Real));
                let values = |label| -> Vec<f64> {
                    samples
                        .get(&(l, n, label))
                        .map(|rs| rs.iter().map(|r| metric.of(r)).collect())
                        .unwrap_or_default()
                };
                let (vf, vr) = (values(Label::Fake), values(Label::Real));
                let (test, skip_reason) = if vf.len() < 2 || vr.len() < 2 {
                    (
                        None,
                        Some(format!(
                            "fewer than 2 documents per class with at least {} sentences (fake {}, real {})",
                            l + 1,
                            vf.len(),
                            vr.len()
                        )),
                    )
                } else if stats::variance(&vf) == 0.0 && stats::variance(&vr) == 0.0 {
                    (None, Some("zero variance in both classes".to_string()))
                } else {
                    (Some(stats::t_test(&vf, &vr, config.test)?), None)
                };
                cells.push(Cell {
                    metric,
                    l,
                    n_topics: n,
                    fake,
                    real,
                    test,
                    skip_reason,
                });
            }
        }
    }
    Ok(cells)
}

pub fn assemble_report(
    prepared: &PreparedCorpus,
    config: &ExperimentConfig,
    records: Vec<DivergenceRecord>,
) -> Result<ExperimentReport> {
    let cells = build_cells(&records, config)?;
    let filtered = filter_counts(prepared, &config.l_values)?;
    for f in &filtered {
        if f.filtered() > 0 {
            log::info!("l={}: {} documents filtered for having too few sentences", f.l, f.filtered());
        }
    }
    Ok(ExperimentReport {
        cells,
        records,
        filtered,
        provenance: Some(Provenance {
            config: config.clone(),
            corpus_hash: prepared.corpus_hash.clone(),
            dictionary_hash: prepared.dictionary.content_hash(),
            vocab_size: prepared.dictionary.len(),
            documents: prepared.docs.len(),
            training_seeds: config
                .n_values
                .iter()
                .map(|&n| (n, training_seed(config.seed, n)))
                .collect(),
            inference_seed_rule: "sha256(seed, \"infer\", l, N, doc_id, opening|remainder)[0..8] LE".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }),
    })
}

/// Report over saved records. The grid is taken from `config`; filter
/// counts and provenance are not available.
pub fn report_from_records(records: Vec<DivergenceRecord>, config: &ExperimentConfig) -> Result<ExperimentReport> {
    Ok(ExperimentReport {
        cells: build_cells(&records, config)?,
        records,
        filtered: Vec::new(),
        provenance: None,
    })
}

/// Preprocess, train, analyze and assemble the report.
pub fn run_experiment(corpus: &[Document], config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let prepared = prepare(corpus, &config.textprep)?;
    let models = train_models(&prepared, config)?;
    let records = analyze(&prepared, &models, &config.l_values, config.seed)?;
    assemble_report(&prepared, config, records)
}

/// Per-article values of one metric at one opening length, each article's
/// value averaged over the topic counts present. Returned per class in
/// order of first appearance.
pub fn pooled_over_topics(records: &[DivergenceRecord], metric: Metric, l: usize) -> (Vec<f64>, Vec<f64>) {
    let mut order: Vec<(&str, Label)> = Vec::new();
    let mut sums: std::collections::HashMap<&str, (f64, usize)> = std::collections::HashMap::new();
    for r in records.iter().filter(|r| r.l == l) {
        let e = sums.entry(&r.doc_id).or_insert_with(|| {
            order.push((&r.doc_id, r.label));
            (0.0, 0)
        });
        e.0 += metric.of(r);
        e.1 += 1;
    }
    let (mut fake, mut real) = (Vec::new(), Vec::new());
    for (id, label) in order {
        let (s, c) = sums[id];
        match label {
            Label::Fake => fake.push(s / c as f64),
            Label::Real => real.push(s / c as f64),
        }
    }
    (fake, real)
}
