//! Summary tables and plot data derived from an experiment report.
//!
//! * `table2.csv`: one row per dataset with the one-tailed p-value of each
//!   metric, plus the `(l, N)` aggregation the row was computed at.
//! * `table3.csv`: per metric, class means and medians with the sign of the
//!   difference of means taken at full precision.
//!
//! Table values are rendered with 4 significant digits; a value that could
//! not be computed is written as `NA(reason)`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thematic_core::divergence::Metric;
use thematic_core::pipeline::{pooled_over_topics, ExperimentReport};
use thematic_core::stats::{self, TTestOptions};
use thematic_core::{Error, Result};

pub const TABLE2_COLUMNS: [&str; 5] = ["dataset", "aggregation", "p_ch", "p_e", "p_se"];
pub const TABLE3_COLUMNS: [&str; 9] = [
    "dataset", "aggregation", "metric", "mean_fake", "mean_real", "median_fake", "median_real", "n_fake",
    "n_real",
];
pub const TABLE3_SIGN_COLUMN: &str = "sign";
pub const PLOT_COLUMNS: [&str; 6] = ["N", "label", "mean", "median", "ci_lo", "ci_hi"];

/// Which slice of the grid the summary tables describe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableOptions {
    pub dataset: String,
    /// Defaults to the largest opening length in the report.
    pub l: Option<usize>,
    /// `None` averages each article over every topic count before testing.
    pub n_topics: Option<usize>,
    pub test: TTestOptions,
}

/// Value rendered with `digits` significant digits. Very small or large
/// magnitudes switch to scientific notation.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{:.*e}", digits.saturating_sub(1), x);
    }
    let decimals = (digits as i32 - 1 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit, e.g. 9.9996 -> 10.000
    let carried = s.parse::<f64>().is_ok_and(|r| r.abs() >= 10f64.powi(mag + 1));
    if decimals > 0 && carried {
        format!("{x:.*}", decimals - 1)
    } else {
        s
    }
}

fn na(reason: &str) -> String {
    format!("NA({reason})")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Row {
    pub dataset: String,
    pub aggregation: String,
    /// p-value or the reason it is missing, in `Metric::ALL` order.
    pub p: Vec<std::result::Result<f64, String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table3Row {
    pub metric: Metric,
    pub mean_fake: f64,
    pub mean_real: f64,
    pub median_fake: f64,
    pub median_real: f64,
    pub n_fake: usize,
    pub n_real: usize,
}

impl Table3Row {
    /// Sign of mean(fake) - mean(real) at full precision.
    pub fn sign(&self) -> &'static str {
        match self.mean_fake.partial_cmp(&self.mean_real) {
            Some(std::cmp::Ordering::Greater) => "+",
            Some(std::cmp::Ordering::Less) => "-",
            _ => "0",
        }
    }
}

fn table_l(report: &ExperimentReport, opts: &TableOptions) -> Result<usize> {
    let available: Vec<usize> = {
        let mut v: Vec<usize> = report.cells.iter().map(|c| c.l).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    match opts.l {
        Some(l) if available.contains(&l) => Ok(l),
        Some(l) => Err(Error::Validation(format!("l={l} is not in the report (available: {available:?})"))),
        None => available
            .last()
            .copied()
            .ok_or_else(|| Error::Validation("report has no cells".into())),
    }
}

fn metrics_of(report: &ExperimentReport) -> Result<Vec<Metric>> {
    let metrics: Vec<Metric> = Metric::ALL
        .into_iter()
        .filter(|m| report.cells.iter().any(|c| c.metric == *m))
        .collect();
    if metrics.is_empty() {
        return Err(Error::Validation("report has no metrics to tabulate".into()));
    }
    Ok(metrics)
}

pub fn aggregation_label(l: usize, n_topics: Option<usize>, n_values: &[usize]) -> String {
    match n_topics {
        Some(n) => format!("l={l}; N={n}"),
        None => {
            let ns: Vec<String> = n_values.iter().map(|n| n.to_string()).collect();
            format!("l={l}; N pooled per article over {{{}}}", ns.join(","))
        }
    }
}

fn n_values(report: &ExperimentReport) -> Vec<usize> {
    let mut v: Vec<usize> = report.cells.iter().map(|c| c.n_topics).collect();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn table2_row(report: &ExperimentReport, opts: &TableOptions) -> Result<Table2Row> {
    let metrics = metrics_of(report)?;
    let l = table_l(report, opts)?;
    let p = Metric::ALL
        .iter()
        .map(|&m| {
            if !metrics.contains(&m) {
                return Err("metric not selected".to_string());
            }
            match opts.n_topics {
                Some(n) => {
                    let cell = report
                        .cell(m, l, n)
                        .ok_or_else(|| format!("no cell at l={l} N={n}"))?;
                    match (&cell.test, &cell.skip_reason) {
                        (Some(t), _) => Ok(t.p),
                        (None, Some(r)) => Err(r.clone()),
                        (None, None) => Err("no test".to_string()),
                    }
                }
                None => {
                    let (f, r) = pooled_over_topics(&report.records, m, l);
                    stats::t_test(&f, &r, opts.test).map(|t| t.p).map_err(|e| e.to_string())
                }
            }
        })
        .collect();
    Ok(Table2Row {
        dataset: opts.dataset.clone(),
        aggregation: aggregation_label(l, opts.n_topics, &n_values(report)),
        p,
    })
}

/// Class means and medians at the table's `l`, each article averaged over
/// every topic count first.
pub fn table3_rows(report: &ExperimentReport, opts: &TableOptions) -> Result<Vec<Table3Row>> {
    let l = table_l(report, opts)?;
    let mut rows = Vec::new();
    for m in metrics_of(report)? {
        let (f, r) = pooled_over_topics(&report.records, m, l);
        if f.is_empty() || r.is_empty() {
            continue;
        }
        rows.push(Table3Row {
            metric: m,
            mean_fake: stats::mean(&f),
            mean_real: stats::mean(&r),
            median_fake: stats::median(&f),
            median_real: stats::median(&r),
            n_fake: f.len(),
            n_real: r.len(),
        });
    }
    Ok(rows)
}

/// Writes `table2.csv` and `table3.csv` into `dir` and returns their paths.
pub fn emit_tables(report: &ExperimentReport, opts: &TableOptions, dir: &Path) -> Result<Vec<PathBuf>> {
    let row2 = table2_row(report, opts)?;
    let rows3 = table3_rows(report, opts)?;
    let l = table_l(report, opts)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let p2 = dir.join("table2.csv");
    let mut w = csv::Writer::from_path(&p2)?;
    w.write_record(TABLE2_COLUMNS)?;
    let mut rec = vec![row2.dataset.clone(), row2.aggregation.clone()];
    rec.extend(row2.p.iter().map(|p| match p {
        Ok(v) => fmt_sig(*v, 4),
        Err(reason) => na(reason),
    }));
    w.write_record(&rec)?;
    w.flush().map_err(|e| Error::io(&p2, e))?;

    let p3 = dir.join("table3.csv");
    let mut w = csv::Writer::from_path(&p3)?;
    let mut header: Vec<&str> = TABLE3_COLUMNS.to_vec();
    header.push(TABLE3_SIGN_COLUMN);
    w.write_record(&header)?;
    let aggregation = aggregation_label(l, None, &n_values(report));
    for r in &rows3 {
        w.write_record([
            opts.dataset.clone(),
            aggregation.clone(),
            r.metric.code().to_string(),
            fmt_sig(r.mean_fake, 4),
            fmt_sig(r.mean_real, 4),
            fmt_sig(r.median_fake, 4),
            fmt_sig(r.median_real, 4),
            r.n_fake.to_string(),
            r.n_real.to_string(),
            r.sign().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&p3, e))?;
    Ok(vec![p2, p3])
}

/// Long-form `N, label, mean, median, ci_lo, ci_hi` rows for one metric and
/// opening length, one row per topic count and class.
pub fn emit_plot_data(report: &ExperimentReport, metric: Metric, l: usize, path: &Path) -> Result<()> {
    let cells: Vec<_> = report
        .cells
        .iter()
        .filter(|c| c.metric == metric && c.l == l)
        .collect();
    if cells.is_empty() {
        let mut available: Vec<String> = report
            .cells
            .iter()
            .map(|c| format!("{}@l={}", c.metric, c.l))
            .collect();
        available.dedup();
        return Err(Error::Validation(format!(
            "no cells for metric {metric} at l={l}; available: {}",
            available.join(", ")
        )));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(PLOT_COLUMNS)?;
    for c in cells {
        for a in [&c.fake, &c.real].into_iter().flatten() {
            let (lo, hi) = a.ci();
            w.write_record([
                a.n_topics.to_string(),
                a.label.to_string(),
                a.mean.to_string(),
                a.median.to_string(),
                lo.to_string(),
                hi.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
