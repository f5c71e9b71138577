use thiserror::Error;

/// Errors produced by point-set construction, model building and the solve
/// pipeline.
#[derive(Debug, Error)]
pub enum DomError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// CSV parse failure, located by file, 1-based line and column.
    #[error("{path}:{line}:{column}: {message}")]
    Csv {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("exact-dp refused: |Q| = {size} exceeds the subset-DP limit {limit}; use the external backend")]
    DpSizeLimit { size: usize, limit: usize },

    #[error("the exact bi-objective algorithm requires M = 2, got M = {0}")]
    UnsupportedDimension(usize),

    #[error("external solver: {0}")]
    Backend(String),

    #[error("solution reconstruction: {0}")]
    Reconstruction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DomError>;
