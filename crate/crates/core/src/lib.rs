//! Offensive playing-style analysis for basketball lineups.
//!
//! The library covers the full batch pipeline:
//!
//! * [`model`] — canonical data schemas, validation, CSV ingestion, and a
//!   parametric synthetic-data generator for desk-scale verification;
//! * [`features`] — 17-dimensional shot features, standardization + PCA,
//!   and playtype role features;
//! * [`transport`] — exact p-Wasserstein (EMD) distances between players'
//!   empirical shot distributions via network simplex;
//! * [`clustering`] — Ward linkage on a precomputed distance matrix,
//!   silhouette scoring, k-means, and fuzzy C-means;
//! * [`lineup`] — 5-player count features, 2-player combination features,
//!   cluster merging, response adjustment, and shot-efficiency stats;
//! * [`inference`] — the Bayesian hierarchical linear model fitted by NUTS,
//!   split R-hat diagnostics, effect tables, and a ridge baseline with
//!   leave-one-team-out cross-validation.

pub mod clustering;
pub mod config;
pub mod error;
pub mod features;
pub mod inference;
pub mod lineup;
pub mod model;
pub mod transport;

pub use config::PipelineConfig;
pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
