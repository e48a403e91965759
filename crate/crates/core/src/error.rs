use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("cell index error: {0}")]
    Index(String),

    #[error("0-cells have an empty boundary")]
    EmptyBoundary,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("normalization denominator is zero (requires p_d < 1 and all p_i > 0)")]
    ZeroDenominator,

    #[error("matrix dimension {dim} exceeds the dense eigensolve cutoff {cutoff}; use trace_moments for sparse moment estimates")]
    DenseCutoff { dim: usize, cutoff: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigensolver failed to converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("spectral health check failed: {0}")]
    SpectralHealth(String),

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
