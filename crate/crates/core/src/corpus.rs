//! Labeled article corpora and the opening/remainder split.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Smallest and largest opening length accepted by the split.
pub const MIN_OPENING: usize = 1;
pub const MAX_OPENING: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Fake,
    Real,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Fake, Label::Real];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Fake => "fake",
            Label::Real => "real",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fake" => Ok(Label::Fake),
            "real" => Ok(Label::Real),
            other => Err(format!("label {other:?} is not one of fake, real")),
        }
    }
}

/// One labeled news article.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub label: Label,
    pub text: String,
    /// Filled in by sentence segmentation; empty until then.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sentences: Vec<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, label: Label, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            label,
            text: text.into(),
            sentences: Vec::new(),
        }
    }
}

/// Maps source columns of a CSV file onto the (id, label, text) schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvAdapter {
    /// Column holding the article id. When absent, ids are generated from
    /// `id_prefix` and the 1-based data row number.
    pub id_column: Option<String>,
    pub label_column: Option<String>,
    /// Label assigned to every row; used for per-class files such as
    /// `Fake.csv` / `True.csv`. Takes precedence over `label_column`.
    pub fixed_label: Option<Label>,
    pub text_column: String,
    pub id_prefix: String,
}

impl Default for CsvAdapter {
    fn default() -> Self {
        CsvAdapter {
            id_column: Some("id".into()),
            label_column: Some("label".into()),
            fixed_label: None,
            text_column: "text".into(),
            id_prefix: "row-".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CorpusFormat {
    Jsonl,
    Csv(CsvAdapter),
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv(CsvAdapter::default())),
            other => Err(Error::Config(format!(
                "unknown corpus format {other:?} (expected jsonl or csv)"
            ))),
        }
    }
}

/// Result of loading a corpus: the accepted documents plus one warning per
/// rejected blank record.
#[derive(Debug, Clone, Default)]
pub struct LoadedCorpus {
    pub documents: Vec<Document>,
    pub warnings: Vec<String>,
}

impl LoadedCorpus {
    pub fn count(&self, label: Label) -> usize {
        self.documents.iter().filter(|d| d.label == label).count()
    }
}

pub fn load_corpus(path: impl AsRef<Path>, format: &CorpusFormat) -> Result<LoadedCorpus> {
    let path = path.as_ref();
    let mut corpus = match format {
        CorpusFormat::Jsonl => load_jsonl(path)?,
        CorpusFormat::Csv(adapter) => load_csv(path, adapter)?,
    };
    check_unique_ids(&corpus.documents)?;
    for w in &corpus.warnings {
        log::warn!("{w}");
    }
    corpus.documents.shrink_to_fit();
    Ok(corpus)
}

/// Loads a corpus laid out as two per-class CSV files (`Fake.csv` and
/// `True.csv` with `title,text,subject,date` columns).
pub fn load_isot_dir(dir: impl AsRef<Path>) -> Result<LoadedCorpus> {
    let dir = dir.as_ref();
    let mut out = LoadedCorpus::default();
    for (file, label, prefix) in [
        ("Fake.csv", Label::Fake, "fake-"),
        ("True.csv", Label::Real, "real-"),
    ] {
        let adapter = CsvAdapter {
            id_column: None,
            label_column: None,
            fixed_label: Some(label),
            text_column: "text".into(),
            id_prefix: prefix.into(),
        };
        let part = load_csv(&dir.join(file), &adapter)?;
        out.documents.extend(part.documents);
        out.warnings.extend(part.warnings);
    }
    check_unique_ids(&out.documents)?;
    Ok(out)
}

fn load_jsonl(path: &Path) -> Result<LoadedCorpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = LoadedCorpus::default();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message,
        };
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let field = |name: &str| -> Result<&str> {
            value
                .get(name)
                .and_then(|v| v.as_str())
                .ok_or_else(|| parse_err(format!("missing string field {name:?}")))
        };
        let id = field("id")?;
        let label = field("label")?.parse::<Label>().map_err(parse_err)?;
        let text = field("text")?;
        push_record(&mut out, path, lineno, id, label, text)?;
    }
    Ok(out)
}

fn load_csv(path: &Path, adapter: &CsvAdapter) -> Result<LoadedCorpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(BufReader::new(file));
    let headers = reader.headers()?.clone();
    let column = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("header has no column {name:?}"),
            })
    };
    let id_col = adapter.id_column.as_deref().map(column).transpose()?;
    let label_col = match (adapter.fixed_label, adapter.label_column.as_deref()) {
        (Some(_), _) => None,
        (None, Some(name)) => Some(column(name)?),
        (None, None) => {
            return Err(Error::Config(
                "csv adapter needs either a label column or a fixed label".into(),
            ))
        }
    };
    let text_col = column(&adapter.text_column)?;

    let mut out = LoadedCorpus::default();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let lineno = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(row + 2);
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message,
        };
        let get = |col: usize| {
            record
                .get(col)
                .ok_or_else(|| parse_err(format!("missing column {col}")))
        };
        let id = match id_col {
            Some(c) => get(c)?.to_string(),
            None => format!("{}{}", adapter.id_prefix, row + 1),
        };
        let label = match (adapter.fixed_label, label_col) {
            (Some(l), _) => l,
            (None, Some(c)) => get(c)?.parse::<Label>().map_err(parse_err)?,
            (None, None) => unreachable!("checked above"),
        };
        let text = get(text_col)?;
        push_record(&mut out, path, lineno, &id, label, text)?;
    }
    Ok(out)
}

fn push_record(
    out: &mut LoadedCorpus,
    path: &Path,
    line: usize,
    id: &str,
    label: Label,
    text: &str,
) -> Result<()> {
    if id.trim().is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            message: "empty id".into(),
        });
    }
    if text.trim().is_empty() {
        out.warnings.push(format!(
            "{}:{line}: document {id:?} has empty text, skipped",
            path.display()
        ));
        return Ok(());
    }
    out.documents.push(Document::new(id, label, text));
    Ok(())
}

fn check_unique_ids(docs: &[Document]) -> Result<()> {
    let mut seen = HashSet::with_capacity(docs.len());
    for d in docs {
        if !seen.insert(d.id.as_str()) {
            return Err(Error::Validation(format!("duplicate document id {:?}", d.id)));
        }
    }
    Ok(())
}

/// SHA-256 over the ordered (id, label, text) triples.
pub fn corpus_hash(docs: &[Document]) -> String {
    let mut h = Sha256::new();
    for d in docs {
        for part in [d.id.as_str(), d.label.as_str(), d.text.as_str()] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part.as_bytes());
        }
    }
    hex::encode(h.finalize())
}

/// A document cut into its first `l` sentences and the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitDoc {
    pub doc_id: String,
    pub opening: Vec<String>,
    pub remainder: Vec<String>,
    pub l: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Split {
    Kept(SplitDoc),
    /// Fewer than `l + 1` sentences; excluded from the run at this `l`.
    Filtered,
}

pub fn check_opening_len(l: usize) -> Result<()> {
    if (MIN_OPENING..=MAX_OPENING).contains(&l) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "opening length l={l} is outside the valid range {MIN_OPENING}-{MAX_OPENING}"
        )))
    }
}

/// Splits any per-sentence sequence at `l`. Returns `None` when the sequence
/// has fewer than `l + 1` items.
pub fn split_at_opening<T>(items: &[T], l: usize) -> Result<Option<(&[T], &[T])>> {
    check_opening_len(l)?;
    if items.len() < l + 1 {
        return Ok(None);
    }
    Ok(Some(items.split_at(l)))
}

pub fn split_document(doc: &Document, l: usize) -> Result<Split> {
    Ok(match split_at_opening(&doc.sentences, l)? {
        Some((opening, remainder)) => Split::Kept(SplitDoc {
            doc_id: doc.id.clone(),
            opening: opening.to_vec(),
            remainder: remainder.to_vec(),
            l,
        }),
        None => Split::Filtered,
    })
}
