use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is singular")]
    Singular,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An enumeration would produce more representatives than the configured cap.
    #[error("representative count {requested} exceeds the cap of {cap}")]
    CapExceeded { requested: String, cap: u64 },

    #[error("entry has a denominator with a prime factor other than {p}")]
    ForeignDenominator { p: u64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("reduction did not converge within {0} steps")]
    ReductionStalled(usize),

    #[error("parameter is not dominant: real parts must be non-increasing")]
    NotDominant,

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("parse error: {0}")]
    Parse(String),
}
