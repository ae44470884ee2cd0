use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain parameters: {0}")]
    InvalidParams(String),

    #[error("excitation number {k} out of range for a chain of {l} sites")]
    SectorOutOfRange { l: usize, k: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("need at least {required} values, got {found}")]
    TooFewSamples { required: usize, found: usize },

    #[error("difference range M = {m} outside 1..{n}")]
    DifferenceRange { m: usize, n: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("field has no spectral content")]
    EmptySpectrum,

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("process precondition violated: {0}")]
    InvalidProcess(String),
}

pub type Result<T> = std::result::Result<T, Error>;
