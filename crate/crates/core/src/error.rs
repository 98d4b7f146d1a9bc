use thiserror::Error;

/// Errors surfaced by solvers, generators and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("iterate became non-finite at iteration {iter}")]
    Diverged { iter: u64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("solver did not converge: {0}")]
    Unconverged(String),

    #[error("reference objective could not be resolved: {0}")]
    UnresolvedReference(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed trace data: {0}")]
    TraceFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
