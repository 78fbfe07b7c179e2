//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("parse error at {locator}: {message}")]
    Parse { locator: String, message: String },

    #[error("dataset failed validation with {0} violation(s)")]
    Validation(usize),

    #[error("invalid synthetic spec: {0}")]
    SynthSpec(String),

    #[error("feature extraction failed for {player_id}: {message}")]
    FeatureExtraction { player_id: String, message: String },

    #[error("PCA error: {0}")]
    Pca(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("transport solve failed{}: {message}", pair_suffix(.pair))]
    Transport {
        pair: Option<(String, String)>,
        message: String,
    },

    #[error("clustering error: {0}")]
    Clustering(String),

    #[error("lineup feature error: {0}")]
    Lineup(String),

    #[error("undefined stat: {0}")]
    UndefinedStat(String),

    #[error("inference error: {0}")]
    Inference(String),

    #[error("sampler rejected fit: {0}")]
    SamplerRejected(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn pair_suffix(pair: &Option<(String, String)>) -> String {
    match pair {
        Some((a, b)) => format!(" for pair ({a}, {b})"),
        None => String::new(),
    }
}
