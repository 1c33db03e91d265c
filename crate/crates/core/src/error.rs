use std::path::PathBuf;

use thiserror::Error;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("inverse unbounded: level {level} exceeds sup over the horizon [0, {horizon:e}]")]
    UnboundedInverse { level: f64, horizon: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("degenerate construction: {0}")]
    Degenerate(String),

    #[error("invalid function spec at `{field}`: {message}")]
    InvalidSpec { field: String, message: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("missing gradient samples and no finite-difference fallback available")]
    MissingGradient,

    #[error("norm bracket exhausted on [1e-12, 1e12]")]
    UnboundedNorm,

    #[error("division guard: {0}")]
    DivisionGuard(String),

    #[error("resolution too coarse: {0}")]
    Resolution(String),

    #[error("no level up to {largest_level:e} makes the half-ball modular negligible (last value {modular:e})")]
    SupBoundNotFound { largest_level: f64, modular: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
