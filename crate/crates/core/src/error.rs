use std::io;

use thiserror::Error;

/// Errors produced by the factorization library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix size must be at least {min}, got {got}")]
    InvalidSize { got: usize, min: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("input must not be empty")]
    EmptyInput,

    #[error("n = {n} exceeds the dense budget of {budget}")]
    DenseBudgetExceeded { n: usize, budget: usize },

    #[error("unknown method `{0}` (expected sqrt, nsr or group-algebra)")]
    UnknownMethod(String),

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_size(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::InvalidSize { got: n, min })
    } else {
        Ok(())
    }
}
