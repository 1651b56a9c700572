//! Latent Dirichlet allocation by collapsed Gibbs sampling.
//!
//! Training resamples every token's topic from
//! `P(z = k) ∝ (n_dk + α) (n_kw + β) / (n_k + Vβ)` with the token's own
//! assignment removed from the counts. Inference for a new document holds the
//! trained topic-word counts fixed and samples only that document's
//! assignments, averaging `(n_dk + α) / (len + Nα)` over the sweeps after
//! burn-in.

pub mod rng;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::stats::special::ln_gamma;
use crate::textprep::{BowDoc, Dictionary};
use crate::{Error, Result};
use rng::Xoshiro256;

pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_TRAIN_ITERS: usize = 400;
pub const DEFAULT_INFER_ITERS: usize = 100;
pub const DEFAULT_BURN_IN: usize = 50;

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub num_topics: usize,
    /// Symmetric document-topic prior.
    pub alpha: f64,
    /// Symmetric topic-word prior.
    pub beta: f64,
    pub train_iters: usize,
    pub infer_iters: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// Defaults: α = 1/N, β = 0.01, 400 training sweeps, 100 inference sweeps
    /// of which the first 50 are burn-in.
    pub fn new(num_topics: usize) -> Self {
        LdaConfig {
            num_topics,
            alpha: 1.0 / num_topics.max(1) as f64,
            beta: DEFAULT_BETA,
            train_iters: DEFAULT_TRAIN_ITERS,
            infer_iters: DEFAULT_INFER_ITERS,
            burn_in: DEFAULT_BURN_IN,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.num_topics < 2 {
            return err(format!("number of topics must be at least 2, got {}", self.num_topics));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return err(format!("alpha must be > 0, got {}", self.alpha));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return err(format!("beta must be > 0, got {}", self.beta));
        }
        if self.train_iters < self.burn_in {
            return err(format!(
                "train_iters ({}) must be at least burn_in ({})",
                self.train_iters, self.burn_in
            ));
        }
        if self.infer_iters <= self.burn_in {
            return err(format!(
                "infer_iters ({}) must exceed burn_in ({})",
                self.infer_iters, self.burn_in
            ));
        }
        Ok(())
    }
}

/// Probability vector over topics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicDistribution(pub Vec<f64>);

impl TopicDistribution {
    pub fn uniform(n: usize) -> Self {
        TopicDistribution(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[f64]> for TopicDistribution {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Training state of the collapsed Gibbs sampler. Counts are exposed so
/// that callers can check conservation between sweeps.
#[derive(Debug, Clone)]
pub struct GibbsTrainer {
    config: LdaConfig,
    vocab_size: usize,
    docs: Vec<Vec<u32>>,
    assignments: Vec<Vec<u16>>,
    /// D x N, row-major by document.
    doc_topic: Vec<u32>,
    /// V x N, row-major by word.
    word_topic: Vec<u32>,
    topic_totals: Vec<u64>,
    rng: Xoshiro256,
    sweeps_done: usize,
}

impl GibbsTrainer {
    /// Tokens are taken from each document in ascending word-id order and
    /// given uniformly random initial topics.
    pub fn new(corpus: &[BowDoc], vocab_size: usize, config: LdaConfig) -> Result<Self> {
        config.validate()?;
        if config.num_topics > u16::MAX as usize {
            return Err(Error::Config(format!("at most {} topics are supported", u16::MAX)));
        }
        if corpus.is_empty() {
            return Err(Error::Validation("cannot train LDA on an empty corpus".into()));
        }
        let docs: Vec<Vec<u32>> = corpus.iter().map(BowDoc::expand).collect();
        if docs.iter().all(Vec::is_empty) {
            return Err(Error::Validation("every training document is empty".into()));
        }
        if let Some(&w) = docs.iter().flatten().max() {
            if w as usize >= vocab_size {
                return Err(Error::Validation(format!(
                    "word id {w} is outside the vocabulary of size {vocab_size}"
                )));
            }
        }
        if vocab_size < config.num_topics {
            log::warn!(
                "vocabulary size {vocab_size} is smaller than the number of topics {}",
                config.num_topics
            );
        }
        let k = config.num_topics;
        let mut rng = Xoshiro256::seed_from_u64(config.seed);
        let mut doc_topic = vec![0u32; docs.len() * k];
        let mut word_topic = vec![0u32; vocab_size * k];
        let mut topic_totals = vec![0u64; k];
        let assignments = docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let z = rng.below(k);
                        doc_topic[d * k + z] += 1;
                        word_topic[w as usize * k + z] += 1;
                        topic_totals[z] += 1;
                        z as u16
                    })
                    .collect()
            })
            .collect();
        Ok(GibbsTrainer {
            config,
            vocab_size,
            docs,
            assignments,
            doc_topic,
            word_topic,
            topic_totals,
            rng,
            sweeps_done: 0,
        })
    }

    pub fn sweep(&mut self) {
        let k = self.config.num_topics;
        let alpha = self.config.alpha;
        let beta = self.config.beta;
        let vbeta = self.vocab_size as f64 * beta;
        let mut cumulative = vec![0.0f64; k];
        for (d, words) in self.docs.iter().enumerate() {
            let dt = &mut self.doc_topic[d * k..(d + 1) * k];
            for (i, &w) in words.iter().enumerate() {
                let old = self.assignments[d][i] as usize;
                let wt = &mut self.word_topic[w as usize * k..(w as usize + 1) * k];
                dt[old] -= 1;
                wt[old] -= 1;
                self.topic_totals[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    total += (dt[t] as f64 + alpha) * (wt[t] as f64 + beta)
                        / (self.topic_totals[t] as f64 + vbeta);
                    cumulative[t] = total;
                }
                let u = self.rng.next_f64() * total;
                let new = cumulative.iter().position(|&c| u < c).unwrap_or(k - 1);

                dt[new] += 1;
                wt[new] += 1;
                self.topic_totals[new] += 1;
                self.assignments[d][i] = new as u16;
            }
        }
        self.sweeps_done += 1;
    }

    /// Runs the remaining configured sweeps.
    pub fn run(&mut self) {
        while self.sweeps_done < self.config.train_iters {
            self.sweep();
        }
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps_done
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn doc_len(&self, d: usize) -> usize {
        self.docs[d].len()
    }

    pub fn doc_topic_count(&self, d: usize, topic: usize) -> u32 {
        self.doc_topic[d * self.config.num_topics + topic]
    }

    pub fn topic_word_count(&self, topic: usize, word: usize) -> u32 {
        self.word_topic[word * self.config.num_topics + topic]
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.topic_totals
    }

    /// ln p(w | z) with the topic-word distributions integrated out.
    pub fn log_likelihood(&self) -> f64 {
        log_likelihood(
            &self.word_topic,
            &self.topic_totals,
            self.vocab_size,
            self.config.beta,
        )
    }

    pub fn into_model(self, dictionary_hash: impl Into<String>) -> LdaModel {
        LdaModel {
            config: self.config,
            vocab_size: self.vocab_size,
            dictionary_hash: dictionary_hash.into(),
            word_topic: self.word_topic,
            topic_totals: self.topic_totals,
        }
    }
}

fn log_likelihood(word_topic: &[u32], topic_totals: &[u64], vocab: usize, beta: f64) -> f64 {
    let k = topic_totals.len();
    let vbeta = vocab as f64 * beta;
    let lg_beta = ln_gamma(beta);
    let mut ll = k as f64 * ln_gamma(vbeta);
    for &n in topic_totals {
        ll -= ln_gamma(n as f64 + vbeta);
    }
    for &n in word_topic {
        if n > 0 {
            ll += ln_gamma(n as f64 + beta) - lg_beta;
        }
    }
    ll
}

/// Trained topic-word statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    config: LdaConfig,
    vocab_size: usize,
    dictionary_hash: String,
    word_topic: Vec<u32>,
    topic_totals: Vec<u64>,
}

/// Trains with `config.train_iters` sweeps from `config.seed`.
pub fn train_lda(corpus: &[BowDoc], dictionary: &Dictionary, config: LdaConfig) -> Result<LdaModel> {
    let mut trainer = GibbsTrainer::new(corpus, dictionary.len(), config)?;
    trainer.run();
    Ok(trainer.into_model(dictionary.content_hash()))
}

impl LdaModel {
    pub fn config(&self) -> &LdaConfig {
        &self.config
    }

    pub fn num_topics(&self) -> usize {
        self.config.num_topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn dictionary_hash(&self) -> &str {
        &self.dictionary_hash
    }

    pub fn topic_word_count(&self, topic: usize, word: usize) -> u32 {
        self.word_topic[word * self.config.num_topics + topic]
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.topic_totals
    }

    /// The `n` highest-count word ids of a topic, ties by ascending id.
    pub fn top_words(&self, topic: usize, n: usize) -> Vec<u32> {
        let mut ids: Vec<u32> = (0..self.vocab_size as u32).collect();
        ids.sort_by(|&a, &b| {
            self.topic_word_count(topic, b as usize)
                .cmp(&self.topic_word_count(topic, a as usize))
                .then(a.cmp(&b))
        });
        ids.truncate(n);
        ids
    }

    /// Fold-in Gibbs inference. Word ids outside the model vocabulary are
    /// ignored. An empty document yields the uniform prior.
    pub fn infer(&self, doc: &BowDoc, seed: u64) -> TopicDistribution {
        let k = self.config.num_topics;
        let alpha = self.config.alpha;
        let beta = self.config.beta;
        let vbeta = self.vocab_size as f64 * beta;

        // distinct words with their fixed topic-word factors
        let mut phi: Vec<f64> = Vec::new();
        let mut tokens: Vec<usize> = Vec::new();
        for (&w, &c) in &doc.counts {
            if (w as usize) >= self.vocab_size {
                continue;
            }
            let slot = phi.len() / k.max(1);
            for t in 0..k {
                phi.push(
                    (self.topic_word_count(t, w as usize) as f64 + beta)
                        / (self.topic_totals[t] as f64 + vbeta),
                );
            }
            tokens.extend(std::iter::repeat_n(slot, c as usize));
        }
        if tokens.is_empty() {
            return TopicDistribution::uniform(k);
        }

        let mut rng = Xoshiro256::seed_from_u64(seed);
        let mut z: Vec<usize> = Vec::with_capacity(tokens.len());
        let mut nd = vec![0u32; k];
        for _ in &tokens {
            let t = rng.below(k);
            nd[t] += 1;
            z.push(t);
        }

        let mut acc = vec![0u64; k];
        let mut cumulative = vec![0.0f64; k];
        for sweep in 0..self.config.infer_iters {
            for (i, &slot) in tokens.iter().enumerate() {
                nd[z[i]] -= 1;
                let row = &phi[slot * k..(slot + 1) * k];
                let mut total = 0.0;
                for t in 0..k {
                    total += (nd[t] as f64 + alpha) * row[t];
                    cumulative[t] = total;
                }
                let u = rng.next_f64() * total;
                let new = cumulative.iter().position(|&c| u < c).unwrap_or(k - 1);
                nd[new] += 1;
                z[i] = new;
            }
            if sweep >= self.config.burn_in {
                for t in 0..k {
                    acc[t] += nd[t] as u64;
                }
            }
        }
        let samples = (self.config.infer_iters - self.config.burn_in) as f64;
        let denom = tokens.len() as f64 + k as f64 * alpha;
        TopicDistribution(
            acc.iter()
                .map(|&c| (c as f64 / samples + alpha) / denom)
                .collect(),
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer(&mut w, &ModelFile::from(self))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Refuses a model trained against a different dictionary.
    pub fn load(path: impl AsRef<Path>, dictionary: &Dictionary) -> Result<LdaModel> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mf: ModelFile = serde_json::from_reader(BufReader::new(file))?;
        let model = LdaModel::try_from(mf).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message,
        })?;
        let found = dictionary.content_hash();
        if model.dictionary_hash != found || model.vocab_size != dictionary.len() {
            return Err(Error::DictionaryMismatch {
                expected: model.dictionary_hash,
                found,
            });
        }
        Ok(model)
    }
}

/// On-disk model: config, dictionary hash and sparse `(topic, word, count)`
/// triples.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    config: LdaConfig,
    vocab_size: usize,
    dictionary_hash: String,
    topic_totals: Vec<u64>,
    topic_word: Vec<(u32, u32, u32)>,
}

impl From<&LdaModel> for ModelFile {
    fn from(m: &LdaModel) -> Self {
        let k = m.config.num_topics;
        let mut topic_word = Vec::new();
        for t in 0..k {
            for w in 0..m.vocab_size {
                let c = m.word_topic[w * k + t];
                if c > 0 {
                    topic_word.push((t as u32, w as u32, c));
                }
            }
        }
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            config: m.config.clone(),
            vocab_size: m.vocab_size,
            dictionary_hash: m.dictionary_hash.clone(),
            topic_totals: m.topic_totals.clone(),
            topic_word,
        }
    }
}

impl TryFrom<ModelFile> for LdaModel {
    type Error = String;

    fn try_from(f: ModelFile) -> std::result::Result<Self, String> {
        if f.format_version != MODEL_FORMAT_VERSION {
            return Err(format!("unsupported model format version {}", f.format_version));
        }
        f.config.validate().map_err(|e| e.to_string())?;
        let k = f.config.num_topics;
        if f.topic_totals.len() != k {
            return Err("topic_totals length does not match the number of topics".into());
        }
        let mut word_topic = vec![0u32; f.vocab_size * k];
        for (t, w, c) in f.topic_word {
            if t as usize >= k || w as usize >= f.vocab_size {
                return Err(format!("entry ({t}, {w}) is out of range"));
            }
            word_topic[w as usize * k + t as usize] = c;
        }
        for t in 0..k {
            let sum: u64 = (0..f.vocab_size).map(|w| word_topic[w * k + t] as u64).sum();
            if sum != f.topic_totals[t] {
                return Err(format!("topic {t} counts do not sum to its total"));
            }
        }
        Ok(LdaModel {
            config: f.config,
            vocab_size: f.vocab_size,
            dictionary_hash: f.dictionary_hash,
            word_topic,
            topic_totals: f.topic_totals,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bow(ids: &[u32]) -> BowDoc {
        BowDoc::from_ids("d", ids.iter().copied())
    }

    #[test]
    fn config_validation() {
        assert!(LdaConfig::new(10).validate().is_ok());
        assert!(LdaConfig::new(1).validate().is_err());
        let mut c = LdaConfig::new(5);
        c.alpha = 0.0;
        assert!(c.validate().is_err());
        let mut c = LdaConfig::new(5);
        c.infer_iters = c.burn_in;
        assert!(c.validate().is_err());
        let mut c = LdaConfig::new(5);
        c.train_iters = 10;
        assert!(c.validate().is_err());
        assert_eq!(LdaConfig::new(4).alpha, 0.25);
    }

    #[test]
    fn single_token_corpus_conserves_counts() {
        let mut c = LdaConfig::new(2);
        c.train_iters = 1;
        c.burn_in = 0;
        c.infer_iters = 1;
        let mut tr = GibbsTrainer::new(&[bow(&[0])], 1, c).unwrap();
        tr.run();
        assert_eq!(tr.topic_totals().iter().sum::<u64>(), 1);
    }

    #[test]
    fn rejects_empty_corpora() {
        assert!(GibbsTrainer::new(&[], 3, LdaConfig::new(2)).is_err());
        assert!(GibbsTrainer::new(&[bow(&[]), bow(&[])], 3, LdaConfig::new(2)).is_err());
        assert!(GibbsTrainer::new(&[bow(&[5])], 3, LdaConfig::new(2)).is_err());
    }

    #[test]
    fn empty_doc_infers_uniform_prior() {
        let mut tr = GibbsTrainer::new(&[bow(&[0, 1, 2])], 3, LdaConfig::new(4)).unwrap();
        tr.sweep();
        let m = tr.into_model("h");
        let p = m.infer(&bow(&[]), 9);
        assert_eq!(p.0, vec![0.25; 4]);
        // unknown ids are ignored, giving the prior too
        assert_eq!(m.infer(&bow(&[77]), 9).0, vec![0.25; 4]);
    }
}
