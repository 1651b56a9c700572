use std::collections::HashSet;

use crate::corpus::{Document, Label};
use crate::topicmodel::rng::Xoshiro256;
use crate::{Error, Result};

const WORDS_PER_SENTENCE: usize = 8;
const SHIFTED_OPENING: usize = 5;
const MIN_SENTENCES: usize = 7;
const MIN_WORDS: usize = 20;

pub const SPORTS_WORDS: [&str; 24] = [
    "striker", "goalkeeper", "referee", "stadium", "tournament", "penalty", "midfield", "coach",
    "league", "trophy", "dribble", "tackle", "halftime", "championship", "playoff", "quarterback",
    "touchdown", "umpire", "inning", "pitcher", "sprinter", "marathon", "wrestler", "racket",
];

pub const FINANCE_WORDS: [&str; 24] = [
    "dividend", "portfolio", "bond", "equity", "inflation", "mortgage", "treasury", "hedge",
    "liquidity", "bankruptcy", "auditor", "ledger", "banker", "investor", "broker", "tariff",
    "revenue", "deficit", "currency", "pension", "shareholder", "merger", "subsidy", "commodity",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_per_class: usize,
    pub sentences_per_doc: usize,
    pub vocab_a: Vec<String>,
    pub vocab_b: Vec<String>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(n_per_class: usize, sentences_per_doc: usize, seed: u64) -> Self {
        SyntheticSpec {
            n_per_class,
            sentences_per_doc,
            vocab_a: SPORTS_WORDS.iter().map(|w| w.to_string()).collect(),
            vocab_b: FINANCE_WORDS.iter().map(|w| w.to_string()).collect(),
            seed,
        }
    }
}

/// Two-vocabulary corpus with a built-in thematic shift.
///
/// A real-like article draws every sentence from one vocabulary, chosen per
/// article. A fake-like article draws its first five sentences from one
/// vocabulary and the rest from the other. Articles alternate fake, real and
/// are named `fake-NNNN` / `real-NNNN`.
pub fn make_synthetic(spec: &SyntheticSpec) -> Result<Vec<Document>> {
    if spec.sentences_per_doc < MIN_SENTENCES {
        return Err(Error::Validation(format!(
            "synthetic articles need at least {MIN_SENTENCES} sentences, got {}",
            spec.sentences_per_doc
        )));
    }
    for (name, v) in [("first", &spec.vocab_a), ("second", &spec.vocab_b)] {
        if v.len() < MIN_WORDS {
            return Err(Error::Validation(format!(
                "the {name} word list needs at least {MIN_WORDS} words, got {}",
                v.len()
            )));
        }
        if v.iter().any(|w| w.is_empty() || !w.chars().all(|c| c.is_alphabetic())) {
            return Err(Error::Validation(format!("the {name} word list must hold alphabetic words")));
        }
    }
    let a: HashSet<String> = spec.vocab_a.iter().map(|w| w.to_lowercase()).collect();
    let overlap: Vec<&String> = spec
        .vocab_b
        .iter()
        .filter(|w| a.contains(&w.to_lowercase()))
        .collect();
    if !overlap.is_empty() {
        return Err(Error::Validation(format!("word lists overlap: {overlap:?}")));
    }

    let vocabs = [&spec.vocab_a, &spec.vocab_b];
    let mut rng = Xoshiro256::seed_from_u64(spec.seed);
    let sentence = |rng: &mut Xoshiro256, block: usize| -> String {
        let v = vocabs[block];
        let words: Vec<&str> = (0..WORDS_PER_SENTENCE)
            .map(|_| v[rng.below(v.len())].as_str())
            .collect();
        let mut s = String::new();
        let mut first = words[0].chars();
        if let Some(c) = first.next() {
            s.extend(c.to_uppercase());
            s.push_str(first.as_str());
        }
        for w in &words[1..] {
            s.push(' ');
            s.push_str(w);
        }
        s.push('.');
        s
    };

    let mut docs = Vec::with_capacity(2 * spec.n_per_class);
    for i in 0..spec.n_per_class {
        let block = rng.below(2);
        let fake: Vec<String> = (0..spec.sentences_per_doc)
            .map(|j| sentence(&mut rng, if j < SHIFTED_OPENING { block } else { 1 - block }))
            .collect();
        docs.push(Document::new(format!("fake-{i:04}"), Label::Fake, fake.join(" ")));

        let block = rng.below(2);
        let real: Vec<String> = (0..spec.sentences_per_doc)
            .map(|_| sentence(&mut rng, block))
            .collect();
        docs.push(Document::new(format!("real-{i:04}"), Label::Real, real.join(" ")));
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::segment_sentences;

    #[test]
    fn shape_and_determinism() {
        let spec = SyntheticSpec::new(20, 10, 3);
        let docs = make_synthetic(&spec).unwrap();
        assert_eq!(docs.len(), 40);
        assert_eq!(docs.iter().filter(|d| d.label == Label::Fake).count(), 20);
        assert_eq!(docs, make_synthetic(&spec).unwrap());
        assert_ne!(docs, make_synthetic(&SyntheticSpec::new(20, 10, 4)).unwrap());
        for d in &docs {
            assert_eq!(segment_sentences(&d.text).len(), 10);
        }
    }

    #[test]
    fn fake_openings_share_no_words_with_remainders() {
        let docs = make_synthetic(&SyntheticSpec::new(30, 8, 1)).unwrap();
        let words = |s: &[String]| -> HashSet<String> {
            s.iter()
                .flat_map(|x| x.split_whitespace())
                .map(|w| w.trim_end_matches('.').to_lowercase())
                .collect()
        };
        for d in docs.iter().filter(|d| d.label == Label::Fake) {
            let s = segment_sentences(&d.text);
            assert!(words(&s[..5]).is_disjoint(&words(&s[5..])), "{}", d.id);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(make_synthetic(&SyntheticSpec::new(2, 6, 0)).is_err());
        let mut s = SyntheticSpec::new(2, 8, 0);
        s.vocab_b[0] = "Striker".into();
        assert!(make_synthetic(&s).is_err());
        let mut s = SyntheticSpec::new(2, 8, 0);
        s.vocab_a.truncate(19);
        assert!(make_synthetic(&s).is_err());
    }
}
