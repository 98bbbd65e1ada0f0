use thiserror::Error;

/// Errors raised by encoders, decoders and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("period mismatch: {left} vs {right}")]
    PeriodMismatch { left: u64, right: u64 },

    #[error("moduli {a} and {b} are not co-prime (gcd {gcd})")]
    NotCoprime { a: u64, b: u64, gcd: u64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("no verified solution after {attempts} attempt(s); best similarity {best_similarity:.4}")]
    NotConverged { attempts: usize, best_similarity: f64 },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("format version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
