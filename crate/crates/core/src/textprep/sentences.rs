//! Rule-based sentence segmentation.
//!
//! A sentence ends at `.`, `!` or `?` (optionally followed by closing quotes
//! or brackets) when the next non-space character is an uppercase letter, an
//! opening quote or a digit. A period does not end a sentence when the word
//! it terminates is a known abbreviation, a single initial, or a dotted
//! acronym such as `U.S.`. A blank line always ends a sentence.

use std::collections::HashSet;

const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "ft", "ave", "blvd", "rd", "gen",
    "gov", "sen", "rep", "rev", "col", "lt", "sgt", "capt", "cmdr", "adm", "maj", "hon", "pres",
    "supt", "u.s", "u.k", "u.n", "e.g", "i.e", "vs", "no", "fig", "approx", "dept", "est",
    "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
];

const CLOSERS: &[char] = &['"', '\'', '\u{201d}', '\u{2019}', ')', ']'];
const OPENERS: &[char] = &['"', '\'', '\u{201c}', '\u{2018}', '(', '['];

#[derive(Debug, Clone)]
pub struct SentenceSplitter {
    abbreviations: HashSet<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        SentenceSplitter::with_abbreviations(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl SentenceSplitter {
    /// Entries are matched case-insensitively; a trailing period is optional.
    pub fn with_abbreviations<I, S>(abbrevs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let abbreviations = abbrevs
            .into_iter()
            .map(|a| a.as_ref().trim().trim_end_matches('.').to_lowercase())
            .filter(|a| !a.is_empty())
            .collect();
        SentenceSplitter { abbreviations }
    }

    pub fn split(&self, text: &str) -> Vec<String> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut out = Vec::new();
        let mut start = 0usize;
        let mut i = 0usize;

        while i < chars.len() {
            let (pos, c) = chars[i];

            if c == '\n' {
                // blank line: '\n' [spaces] '\n'
                let mut j = i + 1;
                while j < chars.len() && chars[j].1 != '\n' && chars[j].1.is_whitespace() {
                    j += 1;
                }
                if j < chars.len() && chars[j].1 == '\n' {
                    push_trimmed(&mut out, &text[start..pos]);
                    while j < chars.len() && chars[j].1.is_whitespace() {
                        j += 1;
                    }
                    start = chars.get(j).map_or(text.len(), |&(p, _)| p);
                    i = j;
                    continue;
                }
            }

            if matches!(c, '.' | '!' | '?') {
                let mut j = i + 1;
                while j < chars.len() && (matches!(chars[j].1, '.' | '!' | '?') || CLOSERS.contains(&chars[j].1)) {
                    j += 1;
                }
                let end = chars.get(j).map_or(text.len(), |&(p, _)| p);
                let mut k = j;
                let mut newlines = 0;
                while k < chars.len() && chars[k].1.is_whitespace() {
                    if chars[k].1 == '\n' {
                        newlines += 1;
                    }
                    k += 1;
                }
                if k > j && k < chars.len() {
                    let next = chars[k].1;
                    let starts_sentence =
                        next.is_uppercase() || next.is_ascii_digit() || OPENERS.contains(&next);
                    let blocked = c == '.' && self.is_abbreviation(&text[start..pos]);
                    if newlines >= 2 || (starts_sentence && !blocked) {
                        push_trimmed(&mut out, &text[start..end]);
                        start = chars[k].0;
                        i = k;
                        continue;
                    }
                }
                i = j.max(i + 1);
                continue;
            }
            i += 1;
        }
        push_trimmed(&mut out, &text[start..]);
        out
    }

    /// `before` is the text up to (not including) the period.
    fn is_abbreviation(&self, before: &str) -> bool {
        let word = before
            .rsplit(char::is_whitespace)
            .next()
            .unwrap_or("")
            .trim_start_matches(|c: char| OPENERS.contains(&c));
        if word.is_empty() {
            return false;
        }
        let mut letters = word.chars();
        if letters.next().is_some_and(char::is_alphabetic) && letters.next().is_none() {
            return true;
        }
        // dotted acronyms: single letters separated by periods (U.S, D.C, a.m)
        if word.contains('.')
            && word
                .split('.')
                .all(|part| part.chars().count() == 1 && part.chars().all(char::is_alphabetic))
        {
            return true;
        }
        self.abbreviations.contains(&word.to_lowercase())
    }
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

pub fn segment_sentences(text: &str) -> Vec<String> {
    SentenceSplitter::default().split(text)
}
