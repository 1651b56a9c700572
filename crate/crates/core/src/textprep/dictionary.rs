use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Dense token <-> id mapping. Ids follow first-occurrence order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DictionaryData", into = "DictionaryData")]
pub struct Dictionary {
    token_to_id: HashMap<String, u32>,
    id_to_token: Vec<String>,
    /// Number of documents each token occurs in.
    doc_freq: Vec<u32>,
    num_docs: u32,
}

#[derive(Serialize, Deserialize)]
struct DictionaryData {
    tokens: Vec<String>,
    doc_freq: Vec<u32>,
    num_docs: u32,
}

impl From<Dictionary> for DictionaryData {
    fn from(d: Dictionary) -> Self {
        DictionaryData {
            tokens: d.id_to_token,
            doc_freq: d.doc_freq,
            num_docs: d.num_docs,
        }
    }
}

impl TryFrom<DictionaryData> for Dictionary {
    type Error = String;

    fn try_from(d: DictionaryData) -> std::result::Result<Self, String> {
        if d.tokens.len() != d.doc_freq.len() {
            return Err("dictionary token and frequency lists differ in length".into());
        }
        let token_to_id: HashMap<String, u32> = d
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        if token_to_id.len() != d.tokens.len() {
            return Err("dictionary contains duplicate tokens".into());
        }
        Ok(Dictionary {
            token_to_id,
            id_to_token: d.tokens,
            doc_freq: d.doc_freq,
            num_docs: d.num_docs,
        })
    }
}

impl Dictionary {
    pub fn build<S: AsRef<[String]>>(corpus_tokens: &[S]) -> Result<Self> {
        if corpus_tokens.is_empty() {
            return Err(Error::Validation("cannot build a dictionary from an empty corpus".into()));
        }
        let mut dict = Dictionary {
            token_to_id: HashMap::new(),
            id_to_token: Vec::new(),
            doc_freq: Vec::new(),
            num_docs: corpus_tokens.len() as u32,
        };
        let mut seen = HashSet::new();
        for doc in corpus_tokens {
            seen.clear();
            for tok in doc.as_ref() {
                let id = match dict.token_to_id.get(tok) {
                    Some(&id) => id,
                    None => {
                        let id = dict.id_to_token.len() as u32;
                        dict.token_to_id.insert(tok.clone(), id);
                        dict.id_to_token.push(tok.clone());
                        dict.doc_freq.push(0);
                        id
                    }
                };
                if seen.insert(id) {
                    dict.doc_freq[id as usize] += 1;
                }
            }
        }
        if dict.id_to_token.is_empty() {
            return Err(Error::Validation("corpus contains no tokens".into()));
        }
        Ok(dict)
    }

    /// Drops tokens found in fewer than `no_below` documents or in more than
    /// `no_above` (a fraction) of documents. Survivors keep their relative
    /// order and are renumbered densely.
    pub fn filter_extremes(&self, no_below: u32, no_above: f64) -> Result<Dictionary> {
        let max_df = no_above * self.num_docs as f64;
        let kept: Vec<usize> = (0..self.id_to_token.len())
            .filter(|&i| self.doc_freq[i] >= no_below && self.doc_freq[i] as f64 <= max_df)
            .collect();
        if kept.is_empty() {
            return Err(Error::Validation(format!(
                "dictionary filter (no_below={no_below}, no_above={no_above}) removed every token"
            )));
        }
        let id_to_token: Vec<String> = kept.iter().map(|&i| self.id_to_token[i].clone()).collect();
        Ok(Dictionary {
            token_to_id: id_to_token
                .iter()
                .enumerate()
                .map(|(i, t)| (t.clone(), i as u32))
                .collect(),
            doc_freq: kept.iter().map(|&i| self.doc_freq[i]).collect(),
            id_to_token,
            num_docs: self.num_docs,
        })
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.id_to_token.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }

    pub fn doc_freq(&self, id: u32) -> u32 {
        self.doc_freq[id as usize]
    }

    /// Token ids of the in-vocabulary tokens, in order.
    pub fn ids_of<'a>(&'a self, tokens: &'a [String]) -> impl Iterator<Item = u32> + 'a {
        tokens.iter().filter_map(|t| self.id(t))
    }

    /// SHA-256 of the ordered token list; identifies the id assignment.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.id_to_token {
            h.update(t.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}

/// Sparse bag of words: token id -> count (always >= 1).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BowDoc {
    pub doc_id: String,
    pub counts: BTreeMap<u32, u32>,
}

impl BowDoc {
    pub fn from_ids(doc_id: impl Into<String>, ids: impl IntoIterator<Item = u32>) -> Self {
        let mut counts = BTreeMap::new();
        for id in ids {
            *counts.entry(id).or_insert(0) += 1;
        }
        BowDoc {
            doc_id: doc_id.into(),
            counts,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.values().map(|&c| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Token ids expanded by count, in ascending id order.
    pub fn expand(&self) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.total());
        for (&id, &c) in &self.counts {
            v.extend(std::iter::repeat_n(id, c as usize));
        }
        v
    }
}

/// Out-of-dictionary tokens are skipped.
pub fn to_bow(doc_id: impl Into<String>, tokens: &[String], dict: &Dictionary) -> BowDoc {
    BowDoc::from_ids(doc_id, dict.ids_of(tokens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn docs(v: &[&[&str]]) -> Vec<Vec<String>> {
        v.iter()
            .map(|d| d.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn first_occurrence_ids() {
        let d = Dictionary::build(&docs(&[&["b", "a"], &["a", "c"]])).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!((d.id("b"), d.id("a"), d.id("c")), (Some(0), Some(1), Some(2)));
        assert_eq!(d.doc_freq(1), 2);

        let d = Dictionary::build(&docs(&[&["x", "x"]])).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.id("x"), Some(0));
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let empty: Vec<Vec<String>> = vec![];
        assert!(matches!(Dictionary::build(&empty), Err(Error::Validation(_))));
        assert!(Dictionary::build(&docs(&[&[], &[]])).is_err());
    }

    #[test]
    fn bow_conversion() {
        let d = Dictionary::build(&docs(&[&["a", "b"]])).unwrap();
        let toks = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let bow = to_bow("x", &toks(&["a", "b", "a"]), &d);
        assert_eq!(bow.counts, BTreeMap::from([(0, 2), (1, 1)]));
        assert_eq!(bow.expand(), vec![0, 0, 1]);
        assert!(to_bow("x", &toks(&["z"]), &d).is_empty());
        assert!(to_bow("x", &[], &d).is_empty());
    }

    #[test]
    fn filter_extremes_keeps_order() {
        let d = Dictionary::build(&docs(&[&["a", "b", "c"], &["a", "c"], &["a", "d"]])).unwrap();
        let f = d.filter_extremes(2, 0.9).unwrap();
        // a is in 3/3 docs (> 0.9), b and d in 1 doc
        assert_eq!(f.tokens(), &["c".to_string()]);
        assert_eq!(f.id("c"), Some(0));
        assert!(d.filter_extremes(10, 1.0).is_err());
        assert_eq!(d.filter_extremes(0, 1.0).unwrap(), d);
    }

    #[test]
    fn serde_round_trip_rebuilds_index() {
        let d = Dictionary::build(&docs(&[&["b", "a"], &["a", "c"]])).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        let back: Dictionary = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.content_hash(), d.content_hash());
    }

    proptest! {
        #[test]
        fn round_trip_and_bow_totals(corpus in prop::collection::vec(prop::collection::vec("[a-e]{1,2}", 0..20), 1..8)) {
            prop_assume!(corpus.iter().any(|d| !d.is_empty()));
            let dict = Dictionary::build(&corpus).unwrap();
            for i in 0..dict.len() as u32 {
                prop_assert_eq!(dict.id(dict.token(i).unwrap()), Some(i));
            }
            for doc in &corpus {
                let bow = to_bow("d", doc, &dict);
                prop_assert_eq!(bow.total(), doc.len());
                prop_assert!(bow.counts.keys().all(|&id| (id as usize) < dict.len()));
                prop_assert!(bow.counts.values().all(|&c| c >= 1));
            }
            // against a smaller dictionary the total can only shrink
            let small = Dictionary::build(&corpus[..1]).ok();
            if let Some(small) = small {
                for doc in &corpus {
                    prop_assert!(to_bow("d", doc, &small).total() <= doc.len());
                }
            }
        }
    }
}
