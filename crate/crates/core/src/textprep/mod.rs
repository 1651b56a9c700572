//! Raw text to bag-of-words.
//!
//! The corpus-level order is: sentence segmentation, tokenization with
//! lowercasing and stopword/length filtering, bigram phrase detection over
//! all sentences, phrase merging, and finally stemming of the remaining
//! unigrams (merged phrase tokens are not stemmed). The dictionary is built
//! over whole documents in first-occurrence order.

mod dictionary;
pub mod phrases;
pub mod porter;
pub mod sentences;
pub mod tokens;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dictionary::{to_bow, BowDoc, Dictionary};
pub use phrases::{phrase_score, PhraseTable};
pub use sentences::{segment_sentences, SentenceSplitter};
pub use tokens::{normalize_tokens, normalize_with, read_word_list, tokenize, Normalizer, StopwordSet};

use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextPrepConfig {
    pub normalizer: Normalizer,
    pub phrase_min_count: u64,
    pub phrase_threshold: f64,
    /// Minimum document frequency; 0 disables the filter.
    pub no_below: u32,
    /// Maximum document fraction; 1.0 disables the filter.
    pub no_above: f64,
    pub stopwords_file: Option<PathBuf>,
    pub abbreviations_file: Option<PathBuf>,
}

impl Default for TextPrepConfig {
    fn default() -> Self {
        TextPrepConfig {
            normalizer: Normalizer::Stem,
            phrase_min_count: phrases::DEFAULT_MIN_COUNT,
            phrase_threshold: phrases::DEFAULT_THRESHOLD,
            no_below: 0,
            no_above: 1.0,
            stopwords_file: None,
            abbreviations_file: None,
        }
    }
}

/// Preprocessed article: its sentences and the final tokens of each one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessedDoc {
    pub sentences: Vec<String>,
    pub tokens: Vec<Vec<String>>,
}

impl ProcessedDoc {
    pub fn all_tokens(&self) -> Vec<String> {
        self.tokens.iter().flatten().cloned().collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct TextPipeline {
    pub config: TextPrepConfig,
    splitter: SentenceSplitter,
    stopwords: StopwordSet,
}

impl TextPipeline {
    /// Loads the override word lists named in the config, if any.
    pub fn new(config: TextPrepConfig) -> Result<Self> {
        let stopwords = match &config.stopwords_file {
            Some(p) => StopwordSet::from_words(read_word_list(p)?),
            None => StopwordSet::default(),
        };
        let splitter = match &config.abbreviations_file {
            Some(p) => SentenceSplitter::with_abbreviations(read_word_list(p)?),
            None => SentenceSplitter::default(),
        };
        Ok(TextPipeline {
            config,
            splitter,
            stopwords,
        })
    }

    pub fn stopwords(&self) -> &StopwordSet {
        &self.stopwords
    }

    pub fn segment(&self, text: &str) -> Vec<String> {
        self.splitter.split(text)
    }

    /// Runs the full pipeline over a corpus. Output order follows input order.
    pub fn process_corpus<S: AsRef<str> + Sync>(
        &self,
        texts: &[S],
    ) -> Result<(Vec<ProcessedDoc>, Dictionary)> {
        let raw: Vec<(Vec<String>, Vec<Vec<String>>)> = texts
            .par_iter()
            .map(|t| {
                let sentences = self.segment(t.as_ref());
                let toks = sentences
                    .iter()
                    .map(|s| tokens::filter_tokens(s, &self.stopwords))
                    .collect();
                (sentences, toks)
            })
            .collect();

        let all_sentences: Vec<&Vec<String>> = raw.iter().flat_map(|(_, t)| t.iter()).collect();
        let table = PhraseTable::build(
            &all_sentences,
            self.config.phrase_min_count,
            self.config.phrase_threshold,
        )?;

        let docs: Vec<ProcessedDoc> = raw
            .into_par_iter()
            .map(|(sentences, toks)| ProcessedDoc {
                sentences,
                tokens: toks
                    .iter()
                    .map(|s| {
                        let merged = table.apply(s);
                        match self.config.normalizer {
                            Normalizer::Stem => tokens::stem_tokens(merged, &self.stopwords),
                            Normalizer::None => merged,
                        }
                    })
                    .collect(),
            })
            .collect();

        let whole: Vec<Vec<String>> = docs.iter().map(ProcessedDoc::all_tokens).collect();
        let mut dict = Dictionary::build(&whole)?;
        if self.config.no_below > 0 || self.config.no_above < 1.0 {
            dict = dict.filter_extremes(self.config.no_below, self.config.no_above)?;
        }
        Ok((docs, dict))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_pipeline_merges_then_stems() {
        // letters-only filler words give the corpus a large unigram vocabulary
        let filler = |i: usize| -> String {
            let mut w = String::from("zq");
            let mut n = i;
            for _ in 0..3 {
                w.push((b'a' + (n % 26) as u8) as char);
                n /= 26;
            }
            w
        };
        let mut texts = Vec::new();
        for i in 0..12 {
            let words: Vec<String> = (0..40).map(|j| filler(i * 40 + j)).collect();
            texts.push(format!(
                "Officials in New York reported flooding. The rivers were rising. Extra {}.",
                words.join(" ")
            ));
        }
        let p = TextPipeline::default();
        let (docs, dict) = p.process_corpus(&texts).unwrap();
        assert_eq!(docs.len(), 12);
        assert_eq!(docs[0].sentences.len(), 3);
        // every pair in these repeated sentences is frequent; only merged
        // tokens contain '_' and they are never stemmed
        let first = &docs[0].tokens[0];
        assert!(first.iter().any(|t| t.contains('_')), "{first:?}");
        assert!(!dict.is_empty());
        for d in &docs {
            assert_eq!(d.tokens.len(), d.sentences.len());
        }
    }

    #[test]
    fn deterministic_output() {
        let texts = ["Cats chase mice. Dogs chase cats!", "Mice run fast. Cats sleep."];
        let p = TextPipeline::default();
        let a = p.process_corpus(&texts).unwrap();
        let b = p.process_corpus(&texts).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_eq!(a.0[0].tokens[0], vec!["cat", "chase", "mice"]);
    }

    #[test]
    fn override_files() {
        let dir = tempfile::tempdir().unwrap();
        let sw = dir.path().join("sw.txt");
        std::fs::write(&sw, "cat\n").unwrap();
        let ab = dir.path().join("ab.txt");
        std::fs::write(&ab, "zz.\n").unwrap();
        let p = TextPipeline::new(TextPrepConfig {
            stopwords_file: Some(sw),
            abbreviations_file: Some(ab),
            ..TextPrepConfig::default()
        })
        .unwrap();
        assert!(p.stopwords().contains("cat"));
        assert!(!p.stopwords().contains("the"));
        assert_eq!(p.segment("See zz. Next. Dr. Who."), vec!["See zz. Next.", "Dr.", "Who."]);
    }
}
