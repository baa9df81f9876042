//! Code quality scoring from metric distributions of reference repositories.
//!
//! Each metric is scored 0-100 by where a repository falls in a distribution
//! fitted to a high-quality reference population: a shifted exponential for
//! metrics where more is always worse, an asymmetric Gaussian for metrics with
//! an interior optimum. Per-metric scores are combined with weights taken from
//! the feature importances of a gradient-boosted classifier that separates the
//! most- and least-starred repositories.
//!
//! Module map:
//!
//! - [`distmodel`]: densities, score functions, `erf`
//! - [`corpus`]: repository records, metric registry, CSV ingestion, normalization
//! - [`calibrate`]: maximum-likelihood fitting per language and metric
//! - [`gbm`]: gradient-boosted trees, quantile labels, train/validation split
//! - [`scoring`]: weights and score aggregation
//! - [`evalreport`]: accuracy/precision/recall/F1, AUC, R2, histograms
//! - [`synthgen`]: seeded samplers and a synthetic corpus generator
//! - [`pipeline`]: the end-to-end stages behind the `metriq` binary

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod corpus;
pub mod distmodel;
pub mod error;
pub mod evalreport;
pub mod gbm;
pub mod pipeline;
pub mod scoring;
pub mod synthgen;

pub use error::{Error, Result};
