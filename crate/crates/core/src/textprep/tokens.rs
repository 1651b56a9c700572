//! Word tokenization, stopword filtering and stemming.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::porter;
use crate::{Error, Result};

/// Tokens shorter than this (in characters) are dropped.
pub const MIN_TOKEN_CHARS: usize = 3;

/// English stopwords (179 entries).
pub const ENGLISH_STOPWORDS: &[&str] = &[
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've",
    "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself",
    "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them",
    "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "that'll",
    "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has",
    "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
    "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against",
    "between", "into", "through", "during", "before", "after", "above", "below", "to", "from",
    "up", "down", "in", "out", "on", "off", "over", "under", "again", "further", "then", "once",
    "here", "there", "when", "where", "why", "how", "all", "any", "both", "each", "few", "more",
    "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than",
    "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've", "now",
    "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
    "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn",
    "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan",
    "shan't", "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't",
    "wouldn", "wouldn't",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalizer {
    /// Lowercase and filter only.
    None,
    /// Additionally apply the Porter stemmer.
    #[default]
    Stem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordSet(HashSet<String>);

impl Default for StopwordSet {
    fn default() -> Self {
        StopwordSet::from_words(ENGLISH_STOPWORDS.iter().copied())
    }
}

impl StopwordSet {
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopwordSet(
            words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Reads a word list: one entry per line, `#` starts a comment.
pub fn read_word_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

/// Maximal runs of alphabetic characters, with apostrophes allowed between
/// letters, lowercased.
pub fn tokenize(sentence: &str) -> Vec<String> {
    let chars: Vec<char> = sentence
        .chars()
        .map(|c| if c == '\u{2019}' { '\'' } else { c })
        .collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphabetic() {
            cur.extend(c.to_lowercase());
        } else if c == '\''
            && !cur.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphabetic())
        {
            cur.push('\'');
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn keep(token: &str, stopwords: &StopwordSet) -> bool {
    token.chars().count() >= MIN_TOKEN_CHARS && !stopwords.contains(token)
}

/// Tokenizes, lowercases and drops stopwords and short tokens, without
/// stemming.
pub fn filter_tokens(sentence: &str, stopwords: &StopwordSet) -> Vec<String> {
    tokenize(sentence)
        .into_iter()
        .filter(|t| keep(t, stopwords))
        .collect()
}

/// Stems unigram tokens in place; merged phrase tokens (containing `_`) are
/// left alone. Tokens whose stem becomes a stopword or too short are dropped.
pub fn stem_tokens(tokens: Vec<String>, stopwords: &StopwordSet) -> Vec<String> {
    tokens
        .into_iter()
        .filter_map(|t| {
            if t.contains('_') {
                return Some(t);
            }
            let s = porter::stem(&t);
            keep(&s, stopwords).then_some(s)
        })
        .collect()
}

pub fn normalize_with(
    sentences: &[impl AsRef<str>],
    stopwords: &StopwordSet,
    normalizer: Normalizer,
) -> Vec<String> {
    let tokens: Vec<String> = sentences
        .iter()
        .flat_map(|s| filter_tokens(s.as_ref(), stopwords))
        .collect();
    match normalizer {
        Normalizer::None => tokens,
        Normalizer::Stem => stem_tokens(tokens, stopwords),
    }
}

/// Full normalization with stemming.
pub fn normalize_tokens(sentences: &[impl AsRef<str>], stopwords: &StopwordSet) -> Vec<String> {
    normalize_with(sentences, stopwords, Normalizer::Stem)
}
