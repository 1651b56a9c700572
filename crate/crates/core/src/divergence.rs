//! Distances between opening and remainder topic distributions, and their
//! per-class summaries.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::stats;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "ch")]
    Chebyshev,
    #[serde(rename = "e")]
    Euclidean,
    #[serde(rename = "se")]
    SquaredEuclidean,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Chebyshev, Metric::Euclidean, Metric::SquaredEuclidean];

    pub fn code(self) -> &'static str {
        match self {
            Metric::Chebyshev => "ch",
            Metric::Euclidean => "e",
            Metric::SquaredEuclidean => "se",
        }
    }

    pub fn compute(self, p: &[f64], q: &[f64]) -> Result<f64> {
        match self {
            Metric::Chebyshev => chebyshev(p, q),
            Metric::Euclidean => euclidean(p, q),
            Metric::SquaredEuclidean => squared_euclidean(p, q),
        }
    }

    pub fn of(self, r: &DivergenceRecord) -> f64 {
        match self {
            Metric::Chebyshev => r.d_ch,
            Metric::Euclidean => r.d_e,
            Metric::SquaredEuclidean => r.d_se,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ch" | "chebyshev" => Ok(Metric::Chebyshev),
            "e" | "euclidean" => Ok(Metric::Euclidean),
            "se" | "squared_euclidean" => Ok(Metric::SquaredEuclidean),
            other => Err(Error::Config(format!("metric {other:?} is not one of ch, e, se"))),
        }
    }
}

fn check_lengths(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::Validation(format!(
            "distributions have different lengths ({} and {})",
            p.len(),
            q.len()
        )));
    }
    Ok(())
}

/// `max_i |p_i - q_i|`.
pub fn chebyshev(p: &[f64], q: &[f64]) -> Result<f64> {
    check_lengths(p, q)?;
    Ok(p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// `sqrt(sum_i (p_i - q_i)^2)`.
pub fn euclidean(p: &[f64], q: &[f64]) -> Result<f64> {
    Ok(squared_euclidean(p, q)?.sqrt())
}

/// `sum_i (p_i - q_i)^2`.
pub fn squared_euclidean(p: &[f64], q: &[f64]) -> Result<f64> {
    check_lengths(p, q)?;
    Ok(p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// All three distances for one article at one `(l, N)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRecord {
    pub doc_id: String,
    pub label: Label,
    pub l: usize,
    #[serde(rename = "N")]
    pub n_topics: usize,
    pub d_ch: f64,
    pub d_e: f64,
    pub d_se: f64,
}

impl DivergenceRecord {
    /// The squared Euclidean value is taken from the same sum as the
    /// Euclidean one, so `d_se == d_e^2` up to one rounding.
    pub fn compute(
        doc_id: impl Into<String>,
        label: Label,
        l: usize,
        opening: &[f64],
        remainder: &[f64],
    ) -> Result<Self> {
        let d_se = squared_euclidean(opening, remainder)?;
        Ok(DivergenceRecord {
            doc_id: doc_id.into(),
            label,
            l,
            n_topics: opening.len(),
            d_ch: chebyshev(opening, remainder)?,
            d_e: d_se.sqrt(),
            d_se,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAggregate {
    pub label: Label,
    pub metric: Metric,
    pub l: usize,
    #[serde(rename = "N")]
    pub n_topics: usize,
    pub mean: f64,
    pub median: f64,
    pub count: usize,
    pub ci_half_width: f64,
}

impl ClassAggregate {
    pub fn from_values(label: Label, metric: Metric, l: usize, n_topics: usize, values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation(format!(
                "no {label} values for metric {metric} at l={l}, N={n_topics}"
            )));
        }
        Ok(ClassAggregate {
            label,
            metric,
            l,
            n_topics,
            mean: stats::mean(values),
            median: stats::median(values),
            count: values.len(),
            ci_half_width: stats::ci_half_width(values, 0.95)?,
        })
    }

    pub fn ci(&self) -> (f64, f64) {
        (self.mean - self.ci_half_width, self.mean + self.ci_half_width)
    }
}

/// Values of one metric grouped by `(label, l, N)`, in key order.
pub fn group_values(records: &[DivergenceRecord], metric: Metric) -> BTreeMap<(Label, usize, usize), Vec<f64>> {
    let mut groups: BTreeMap<(Label, usize, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.label, r.l, r.n_topics))
            .or_default()
            .push(metric.of(r));
    }
    groups
}

/// One aggregate per `(label, metric, l, N)` group present in `records`.
/// Ordered by metric, l, N, then label.
pub fn aggregate(records: &[DivergenceRecord], metrics: &[Metric]) -> Result<Vec<ClassAggregate>> {
    let mut out = Vec::new();
    for &metric in metrics {
        let mut rows = Vec::new();
        for ((label, l, n), values) in group_values(records, metric) {
            rows.push(ClassAggregate::from_values(label, metric, l, n, &values)?);
        }
        rows.sort_by_key(|a| (a.l, a.n_topics, a.label));
        out.extend(rows);
    }
    Ok(out)
}

pub const RECORD_COLUMNS: [&str; 7] = ["doc_id", "label", "l", "N", "d_ch", "d_e", "d_se"];

/// Writes records as CSV. Floats use the shortest representation that
/// round-trips exactly.
pub fn write_records(path: impl AsRef<Path>, records: &[DivergenceRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.write_record([
            r.doc_id.clone(),
            r.label.to_string(),
            r.l.to_string(),
            r.n_topics.to_string(),
            r.d_ch.to_string(),
            r.d_e.to_string(),
            r.d_se.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<DivergenceRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != RECORD_COLUMNS {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header {}", RECORD_COLUMNS.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<DivergenceRecord>().enumerate() {
        out.push(row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: [f64; 3] = [0.5, 0.3, 0.2];
    const Q: [f64; 3] = [0.2, 0.5, 0.3];

    #[test]
    fn worked_example() {
        assert!((chebyshev(&P, &Q).unwrap() - 0.3).abs() < 1e-12);
        assert!((squared_euclidean(&P, &Q).unwrap() - 0.14).abs() < 1e-12);
        assert!((euclidean(&P, &Q).unwrap() - 0.14f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn extreme_cases() {
        let a = [1.0, 0.0];
        let b = [0.0, 1.0];
        assert_eq!(chebyshev(&a, &b).unwrap(), 1.0);
        assert_eq!(squared_euclidean(&a, &b).unwrap(), 2.0);
        assert_eq!(euclidean(&a, &b).unwrap(), 2f64.sqrt());
        for m in Metric::ALL {
            assert_eq!(m.compute(&P, &P).unwrap(), 0.0);
        }
        assert!(chebyshev(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn metric_codes_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.code().parse::<Metric>().unwrap(), m);
        }
        assert!("kl".parse::<Metric>().is_err());
    }

    fn rec(id: &str, label: Label, v: f64) -> DivergenceRecord {
        DivergenceRecord {
            doc_id: id.into(),
            label,
            l: 5,
            n_topics: 10,
            d_ch: v,
            d_e: v,
            d_se: v * v,
        }
    }

    #[test]
    fn aggregates() {
        let recs: Vec<_> = [1.0, 2.0, 3.0, 10.0]
            .iter()
            .enumerate()
            .map(|(i, &v)| rec(&format!("f{i}"), Label::Fake, v))
            .chain([rec("r0", Label::Real, 5.0)])
            .collect();
        let aggs = aggregate(&recs, &[Metric::Chebyshev]).unwrap();
        assert_eq!(aggs.len(), 2);
        assert_eq!(aggs[0].label, Label::Fake);
        assert_eq!(aggs[0].mean, 4.0);
        assert_eq!(aggs[0].median, 2.5);
        assert_eq!(aggs[1].mean, 5.0);
        assert_eq!(aggs[1].median, 5.0);
        assert_eq!(aggs[1].ci_half_width, 0.0);
        let odd = ClassAggregate::from_values(Label::Real, Metric::Euclidean, 1, 2, &[3.0, 1.0, 2.0]).unwrap();
        assert_eq!((odd.mean, odd.median), (2.0, 2.0));
    }

    #[test]
    fn records_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.csv");
        let recs = vec![
            DivergenceRecord::compute("a,b", Label::Fake, 3, &P, &Q).unwrap(),
            rec("x", Label::Real, 0.1 + 0.2),
        ];
        write_records(&path, &recs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("doc_id,label,l,N,d_ch,d_e,d_se\n"));
        assert_eq!(read_records(&path).unwrap(), recs);
    }
}
