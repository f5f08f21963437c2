//! Topic-model-based prediction of protest duration.
//!
//! The library covers the full pipeline: CSV ingestion and text
//! preprocessing ([`corpus`]), LDA topic modeling by collapsed Gibbs
//! sampling ([`lda`]), topic-count selection by cross-validated held-out
//! perplexity ([`model_selection`]), conversion of documents to top-topic
//! categorical features ([`features`]), class balancing and train/test
//! splitting ([`sampling`]), gain-ratio decision trees plus bagged and
//! feature-subsampled ensembles ([`trees`]), and confusion-matrix metrics
//! with repeated cross-validation ([`eval`]).
//!
//! Probability and metric computations are generic over the floating-point
//! type through the [`Scalar`] trait; `f64` is the default used by the
//! concrete aliases at the crate root ([`LdaModelF64`] and friends). All
//! randomized routines take explicit 64-bit seeds and use a portable,
//! documented generator, so identical inputs give bit-identical outputs on
//! every platform.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod lda;
pub mod model_selection;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod synthetic;
pub mod trees;

pub use error::{Error, Result};
pub use rng::{derive_seed, rng_from_seed, PortableRng};
pub use scalar::Scalar;

/// Concrete `f64` aliases for the generic pipeline types — the precision the
/// command-line pipeline and the serialized artifacts use.
pub type LdaHyperparamsF64 = lda::LdaHyperparams<f64>;
pub type LdaModelF64 = lda::LdaModel<f64>;
pub type DocTopicMixtureF64 = lda::DocTopicMixture<f64>;
pub type SweepSettingsF64 = model_selection::SweepSettings<f64>;
pub type PerplexityCurveF64 = model_selection::PerplexityCurve<f64>;
pub type MetricReportF64 = eval::MetricReport<f64>;
pub type CrossValidationF64 = eval::CrossValidation<f64>;
