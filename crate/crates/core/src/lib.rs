//! Sentiment scoring of short social-media texts joined with state-level
//! socioeconomic covariates, and a binary logit of positive sentiment with
//! goodness-of-fit, classification and marginal-effect diagnostics.
//!
//! Stages, in pipeline order:
//!
//! * [`corpus`]: ingestion, tokenization, normalization, counting
//! * [`sentiment`]: lexicon scoring and per-state aggregation
//! * [`tabulate`]: covariates, the analysis-table join, descriptives
//! * [`logit`]: maximum-likelihood estimation
//! * [`diagnostics`]: Pearson fit, classification, QQ data, margins
//!
//! Data-parallel loops go through [`par`], which keeps results
//! bit-identical across thread counts.

pub mod corpus;
pub mod diagnostics;
pub mod linalg;
pub mod logit;
pub mod par;
pub mod resources;
pub mod sentiment;
pub mod special;
pub mod states;
pub mod tabulate;

pub use par::Execution;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
