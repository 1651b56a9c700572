//! Thematic deviation analysis for labeled news corpora.
//!
//! Articles are split into an opening (the first `l` sentences) and a
//! remainder. Both parts are mapped to topic distributions with an LDA model
//! trained on the whole corpus, the distance between the two distributions is
//! measured, and the fake and real classes are compared with a one-tailed
//! t-test.
//!
//! The crate is organised along the stages of that procedure:
//!
//! * [`corpus`]: loading labeled articles and the opening/remainder split.
//! * [`textprep`]: sentence segmentation, token normalization, bigram
//!   phrases, dictionary and bag-of-words conversion.
//! * [`topicmodel`]: collapsed Gibbs LDA training and fold-in inference.
//! * [`divergence`]: Chebyshev / Euclidean / squared Euclidean distances and
//!   per-class aggregation.
//! * [`stats`]: Student-t CDF, Welch's t-test and confidence intervals.
//! * [`pipeline`]: the experiment grid, reports, article ranking and the
//!   synthetic corpus generator.

pub mod corpus;
pub mod divergence;
mod error;
pub mod pipeline;
pub mod stats;
pub mod textprep;
pub mod topicmodel;

pub use corpus::{Document, Label};
pub use divergence::{DivergenceRecord, Metric};
pub use error::{Error, Result};
