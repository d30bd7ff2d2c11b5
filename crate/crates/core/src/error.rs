use thiserror::Error;

/// Errors raised by group algebra, grid calculus and the verification harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("projection index {j} out of range 1..={max}")]
    InvalidProjection { j: usize, max: usize },

    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("density has zero total mass")]
    ZeroMass,

    #[error("density is not normalized: total mass {mass}")]
    NotNormalized { mass: f64 },

    #[error("invalid axis selection: {0}")]
    InvalidAxes(String),

    #[error("invalid Brascamp-Lieb datum: {0}")]
    InvalidDatum(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("accumulated Gaussian form is singular (condition number {condition:e})")]
    Singular { condition: f64 },

    #[error("support not covered: {0}")]
    SupportNotCovered(String),

    #[error("invalid constant data: {0}")]
    InvalidScaledData(String),

    #[error("zero input")]
    ZeroInput,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
