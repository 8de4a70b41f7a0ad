use alloc::string::String;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("random generation gave up after {attempts} attempts: {what}")]
    BudgetExceeded { what: String, attempts: usize },
    #[error("instance has {n} vertices, above the enumeration cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("value outside the domain: {0}")]
    Domain(String),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
