use thiserror::Error;

/// Errors raised by graph selection, the numerical kernels and the risk harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sample size n={n} must exceed dimension p={p}")]
    InsufficientSamples { n: usize, p: usize },

    #[error("covariance is not positive definite: pivot {pivot} = {value:e}")]
    SingularCovariance { pivot: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("no positive definite completion exists for entry ({i}, {j})")]
    InfeasibleSlice { i: usize, j: usize },

    #[error("numerical routine failed to converge: {0}")]
    Convergence(String),

    #[error("{failed} of {replications} replications failed (limit 0.1%)")]
    TooManyFailures { failed: u64, replications: u64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
