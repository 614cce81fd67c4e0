//! Error type shared by all solver components.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("krylov breakdown: {0}")]
    Breakdown(String),

    #[error("inner solve failed for block {block}: {reason}")]
    InnerSolve { block: String, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
