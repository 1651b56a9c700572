//! CSV and JSON persistence of pipeline artifacts. Floats are written in
//! the shortest form that parses back to the same value.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use super::{ExperimentReport, PreparedCorpus};
use crate::divergence::write_records;
use crate::{Error, Result};

pub const AGGREGATE_COLUMNS: [&str; 8] = ["metric", "l", "N", "label", "count", "mean", "median", "ci_half_width"];

pub const TEST_COLUMNS: [&str; 13] = [
    "metric", "l", "N", "n_fake", "n_real", "mean_fake", "mean_real", "t", "df", "p", "alternative",
    "variance", "skip_reason",
];

pub const FILTERED_COLUMNS: [&str; 5] = ["l", "kept_fake", "kept_real", "filtered_fake", "filtered_real"];

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_aggregates(path: impl AsRef<Path>, report: &ExperimentReport) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(AGGREGATE_COLUMNS)?;
    for a in report.aggregates() {
        w.write_record([
            a.metric.code().to_string(),
            a.l.to_string(),
            a.n_topics.to_string(),
            a.label.to_string(),
            a.count.to_string(),
            a.mean.to_string(),
            a.median.to_string(),
            a.ci_half_width.to_string(),
        ])?;
    }
    finish(w, path)
}

pub fn write_tests(path: impl AsRef<Path>, report: &ExperimentReport) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TEST_COLUMNS)?;
    for c in &report.cells {
        let mut row = vec![c.metric.code().to_string(), c.l.to_string(), c.n_topics.to_string()];
        match &c.test {
            Some(t) => row.extend([
                t.n_f.to_string(),
                t.n_r.to_string(),
                t.mean_f.to_string(),
                t.mean_r.to_string(),
                t.t.to_string(),
                t.df.to_string(),
                t.p.to_string(),
                t.alternative.as_str().to_string(),
                match t.variance {
                    crate::stats::VarianceModel::Welch => "welch".to_string(),
                    crate::stats::VarianceModel::Pooled => "pooled".to_string(),
                },
                String::new(),
            ]),
            None => {
                let count = |a: Option<&crate::divergence::ClassAggregate>| a.map_or(0, |a| a.count);
                let mean = |a: Option<&crate::divergence::ClassAggregate>| {
                    a.map_or(String::new(), |a| a.mean.to_string())
                };
                row.extend([
                    count(c.fake.as_ref()).to_string(),
                    count(c.real.as_ref()).to_string(),
                    mean(c.fake.as_ref()),
                    mean(c.real.as_ref()),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    c.skip_reason.clone().unwrap_or_default(),
                ]);
            }
        }
        w.write_record(&row)?;
    }
    finish(w, path)
}

pub fn write_filtered(path: impl AsRef<Path>, report: &ExperimentReport) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(FILTERED_COLUMNS)?;
    for f in &report.filtered {
        w.write_record([
            f.l.to_string(),
            f.kept_fake.to_string(),
            f.kept_real.to_string(),
            f.filtered_fake.to_string(),
            f.filtered_real.to_string(),
        ])?;
    }
    finish(w, path)
}

/// Writes `records.csv`, `aggregates.csv`, `tests.csv` and `filtered.csv`
/// into `dir`, creating it if needed.
pub fn write_report(dir: impl AsRef<Path>, report: &ExperimentReport) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_records(dir.join("records.csv"), &report.records)?;
    write_aggregates(dir.join("aggregates.csv"), report)?;
    write_tests(dir.join("tests.csv"), report)?;
    write_filtered(dir.join("filtered.csv"), report)
}

pub fn write_prepared(path: impl AsRef<Path>, prepared: &PreparedCorpus) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, prepared)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_prepared(path: impl AsRef<Path>) -> Result<PreparedCorpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let prepared: PreparedCorpus = serde_json::from_reader(BufReader::new(file))?;
    let v = prepared.dictionary.len() as u32;
    if prepared.docs.iter().flat_map(|d| d.sentences.iter().flatten()).any(|&id| id >= v) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "token id outside the dictionary".into(),
        });
    }
    Ok(prepared)
}
