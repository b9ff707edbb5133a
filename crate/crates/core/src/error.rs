use thiserror::Error;

/// Errors shared across all modules of the crate.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("dimension mismatch between sets")]
    DimensionMismatch,
    #[error("empty set")]
    EmptySet,
    #[error("unsupported input: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
