use thiserror::Error;

/// Errors produced by graph, kernel, and sampler operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("negative edge weights present: {0}; use the signed Laplacian instead")]
    NegativeWeights(String),

    #[error("eigensolver failed to converge: {0}")]
    EigenFailure(String),

    #[error("Cholesky factorization failed at maximum jitter: {0}")]
    CholeskyFailure(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("sampler aborted: {0}")]
    SamplerAbort(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
