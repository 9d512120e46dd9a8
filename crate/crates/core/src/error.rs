use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("index {index} outside the domain ({requirement})")]
    Domain { index: u64, requirement: &'static str },

    #[error("sandwich bound violated at n = {index}")]
    BoundViolation { index: usize },

    #[error("coefficients cover n <= {available}, need n <= {needed}")]
    InsufficientCoefficients { available: usize, needed: usize },

    #[error("denominator vanishes")]
    ZeroDenominator,

    #[error("boundary order {found} below the required {required}")]
    BoundaryOrder { found: usize, required: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> LabError {
    LabError::InvalidParameter { name, reason: reason.into() }
}
