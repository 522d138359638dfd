use alloc::string::String;

/// Errors produced by the recovery kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must be nonempty")]
    EmptyMatrix,

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("sparsity level {k} is outside 1..={n}")]
    SparsityOutOfRange { k: usize, n: usize },

    #[error("index {index} is out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("regularization parameter must be positive, got {0}")]
    NonPositiveEps(f64),

    #[error("matrix is not positive definite (pivot {pivot} is {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("{what} did not converge within {iterations} iterations (last estimate {estimate})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        estimate: f64,
    },

    #[error("entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },

    #[error("problem too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("ground truth is the zero vector")]
    ZeroGroundTruth,

    #[error("matrix has zero largest singular value")]
    ZeroMatrix,

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
}

pub type Result<T> = core::result::Result<T, Error>;
