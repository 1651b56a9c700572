//! Bigram phrase detection.

use std::collections::HashMap;

use crate::{Error, Result};

pub const DEFAULT_MIN_COUNT: u64 = 5;
pub const DEFAULT_THRESHOLD: f64 = 10.0;

/// Collocation score of a pair: `(count(a,b) - min_count) * V / (count(a) * count(b))`
/// where `V` is the number of distinct unigrams. The numerator is clamped at
/// zero, so pairs below `min_count` score 0.
pub fn phrase_score(pair_count: u64, count_a: u64, count_b: u64, vocab_unigrams: u64, min_count: u64) -> f64 {
    if count_a == 0 || count_b == 0 {
        return 0.0;
    }
    pair_count.saturating_sub(min_count) as f64 * vocab_unigrams as f64
        / (count_a as f64 * count_b as f64)
}

/// Unigram and adjacent-pair counts over a corpus of token sequences.
#[derive(Debug, Clone)]
pub struct PhraseTable {
    ids: HashMap<String, u32>,
    tokens: Vec<String>,
    unigram_counts: Vec<u64>,
    pair_counts: HashMap<(u32, u32), u64>,
    total_tokens: u64,
    min_count: u64,
    threshold: f64,
}

impl PhraseTable {
    /// Pairs are only counted within a sequence, never across sequence
    /// boundaries.
    pub fn build<S: AsRef<[String]>>(sequences: &[S], min_count: u64, threshold: f64) -> Result<Self> {
        if min_count < 1 {
            return Err(Error::Config("phrase min_count must be at least 1".into()));
        }
        if !(threshold > 0.0) {
            return Err(Error::Config(format!("phrase threshold must be > 0, got {threshold}")));
        }
        let mut table = PhraseTable {
            ids: HashMap::new(),
            tokens: Vec::new(),
            unigram_counts: Vec::new(),
            pair_counts: HashMap::new(),
            total_tokens: 0,
            min_count,
            threshold,
        };
        let mut seq_ids = Vec::new();
        for seq in sequences {
            seq_ids.clear();
            for tok in seq.as_ref() {
                let id = match table.ids.get(tok) {
                    Some(&id) => id,
                    None => {
                        let id = table.tokens.len() as u32;
                        table.ids.insert(tok.clone(), id);
                        table.tokens.push(tok.clone());
                        table.unigram_counts.push(0);
                        id
                    }
                };
                table.unigram_counts[id as usize] += 1;
                seq_ids.push(id);
            }
            table.total_tokens += seq_ids.len() as u64;
            for w in seq_ids.windows(2) {
                *table.pair_counts.entry((w[0], w[1])).or_default() += 1;
            }
        }
        Ok(table)
    }

    pub fn pair_count(&self, a: &str, b: &str) -> u64 {
        match (self.ids.get(a), self.ids.get(b)) {
            (Some(&x), Some(&y)) => self.pair_counts.get(&(x, y)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn unigram_count(&self, token: &str) -> u64 {
        self.ids
            .get(token)
            .map_or(0, |&id| self.unigram_counts[id as usize])
    }

    pub fn vocab_size(&self) -> u64 {
        self.tokens.len() as u64
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn score(&self, a: &str, b: &str) -> f64 {
        phrase_score(
            self.pair_count(a, b),
            self.unigram_count(a),
            self.unigram_count(b),
            self.vocab_size(),
            self.min_count,
        )
    }

    pub fn is_phrase(&self, a: &str, b: &str) -> bool {
        let n = self.pair_count(a, b);
        n >= self.min_count && self.score(a, b) >= self.threshold
    }

    /// Greedy left-to-right merge of qualifying adjacent pairs into `a_b`;
    /// a merged token is never merged again.
    pub fn apply(&self, tokens: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            if i + 1 < tokens.len() && self.is_phrase(&tokens[i], &tokens[i + 1]) {
                out.push(format!("{}_{}", tokens[i], tokens[i + 1]));
                i += 2;
            } else {
                out.push(tokens[i].clone());
                i += 1;
            }
        }
        out
    }

    /// All qualifying pairs, sorted.
    pub fn phrases(&self) -> Vec<(String, String)> {
        let mut v: Vec<_> = self
            .pair_counts
            .keys()
            .map(|&(a, b)| (self.tokens[a as usize].clone(), self.tokens[b as usize].clone()))
            .filter(|(a, b)| self.is_phrase(a, b))
            .collect();
        v.sort();
        v
    }
}
