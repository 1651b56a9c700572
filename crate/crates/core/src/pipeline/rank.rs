use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::divergence::{DivergenceRecord, Metric};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedArticle {
    pub doc_id: String,
    pub value: f64,
}

/// Most and least diverging articles of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRanking {
    pub label: Label,
    /// Highest values first.
    pub top: Vec<RankedArticle>,
    /// Lowest values first.
    pub bottom: Vec<RankedArticle>,
}

/// Per class, the `k` highest and `k` lowest records by `metric`. Equal
/// values are ordered by ascending doc id in both lists. `k` is capped at the
/// class size. Callers pass the records of a single `(l, N)` cell.
pub fn rank_articles(records: &[DivergenceRecord], metric: Metric, k: usize) -> Vec<ClassRanking> {
    Label::ALL
        .iter()
        .map(|&label| {
            let mut rows: Vec<RankedArticle> = records
                .iter()
                .filter(|r| r.label == label)
                .map(|r| RankedArticle {
                    doc_id: r.doc_id.clone(),
                    value: metric.of(r),
                })
                .collect();
            rows.sort_by(|a, b| a.value.total_cmp(&b.value).then_with(|| a.doc_id.cmp(&b.doc_id)));
            let k = k.min(rows.len());
            let bottom = rows[..k].to_vec();
            let mut top = rows.clone();
            top.sort_by(|a, b| b.value.total_cmp(&a.value).then_with(|| a.doc_id.cmp(&b.doc_id)));
            top.truncate(k);
            ClassRanking { label, top, bottom }
        })
        .collect()
}
