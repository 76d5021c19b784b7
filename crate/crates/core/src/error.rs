use thiserror::Error;

/// Errors raised by the arithmetic and verification routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("all inputs are zero")]
    AllZero,
    #[error("count limit exceeded: {requested} elements requested, limit is {limit}")]
    CountLimit { requested: u128, limit: u64 },
    #[error("insufficient precision: need {needed} digits, have {have}")]
    InsufficientPrecision { needed: usize, have: usize },
    #[error("polynomial is not monic: {0}")]
    NotMonic(String),
    #[error("fraction is not reduced: {0}")]
    NotReduced(String),
    #[error("degree violation: {0}")]
    Degree(String),
    #[error("arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("parameter outside the conforming range: {0}")]
    Range(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by a resource cap rather than bad input.
    pub fn is_limit(&self) -> bool {
        matches!(self, Error::CountLimit { .. })
    }
}
