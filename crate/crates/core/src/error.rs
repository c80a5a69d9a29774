use thiserror::Error;

/// Broad failure class, used to map errors onto process exit codes and
/// FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input, violated precondition, bad file.
    Validation,
    /// The numerical problem is degenerate or could not be solved reliably.
    Numerical,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AfaError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("feature count {n} out of range [{min}, {max}]")]
    NOutOfRange { n: usize, min: usize, max: usize },

    #[error("feature index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("coalition mask {mask:#b} out of range for n = {n}")]
    MaskOutOfRange { mask: u32, n: usize },

    #[error("weight {0} must lie strictly inside (0, 1)")]
    WeightOutOfRange(f64),

    #[error("degenerate band: sizes 1 and n-1 coincide for n = {0}")]
    DegenerateBand(usize),

    #[error("kernel width {0} must be positive")]
    WidthOutOfRange(f64),

    #[error("kernel weights overflow for n = {n}, sigma = {sigma}")]
    Overflow { n: usize, sigma: f64 },

    #[error("kernel scale {0} must be positive")]
    NonPositiveScale(f64),

    #[error("negative or non-finite kernel weight {weight} at size {size}")]
    NegativeWeight { size: usize, weight: f64 },

    #[error("degenerate kernel: no positive weight at coalition sizes 1..n-1")]
    AllZeroInterior,

    #[error("singular system: the unconstrained problem has no unique minimizer")]
    SingularSystem,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("n = {0} is too large for permutation enumeration (max 9)")]
    NTooLargeForPermutations(usize),

    #[error("background dataset is empty")]
    EmptyBackground,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("io error: {0}")]
    Io(String),
}

impl AfaError {
    pub fn class(&self) -> ErrorClass {
        match self {
            AfaError::AllZeroInterior
            | AfaError::SingularSystem
            | AfaError::NumericalFailure(_)
            | AfaError::Overflow { .. } => ErrorClass::Numerical,
            _ => ErrorClass::Validation,
        }
    }
}

impl From<std::io::Error> for AfaError {
    fn from(e: std::io::Error) -> Self {
        AfaError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AfaError>;
