use thiserror::Error;

use crate::functors::NormBracket;

/// Errors raised by the library. Each variant maps onto one CLI exit class.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("input error: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("solver did not reach the requested gap after {iterations} iterations (bracket [{lower}, {upper}])")]
    Solver {
        lower: f64,
        upper: f64,
        iterations: usize,
    },

    #[error("precision target {target:e} not reached: bracket [{}, {}]", bracket.lower, bracket.upper)]
    Precision { bracket: NormBracket, target: f64 },

    #[error("operator is not invertible (smallest singular value {smallest_singular_value:e}, largest {largest_singular_value:e})")]
    NotInvertible {
        smallest_singular_value: f64,
        largest_singular_value: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(LabError::Dimension { expected, found });
    }
    Ok(())
}
