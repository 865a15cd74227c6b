use thiserror::Error;

/// Errors raised by algebra operations, solution builders and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },

    #[error("invalid algebra descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("invalid input for `{field}`: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("element is not invertible (spectral point within {eps:e} of 0)")]
    NotInvertible { eps: f64 },

    #[error("spectrum meets the closed negative real axis; principal logarithm undefined")]
    LogBranchViolation,

    #[error("S(x) is not invertible, x lies outside the Popa group")]
    NotInGroup,

    #[error("S(1_A) is not invertible")]
    UnitNotInGroup,

    #[error("solution is not differentiable at 0")]
    NotDifferentiable,

    #[error("sampling rejected {rejected} of {total} points")]
    DomainExhausted { rejected: usize, total: usize },

    #[error("sigma matrix violates the row constraint at ({row}, {col})")]
    ConstraintViolated { row: usize, col: usize },

    #[error("operation requires dimension 2, got {0}")]
    UnsupportedDimension(usize),

    #[error("operation not supported on this algebra: {0}")]
    UnsupportedAlgebra(String),

    #[error("derivative is not omega-homogeneous for this variant")]
    NotOmegaHomogeneous,

    #[error("fixed-point iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        guaranteed: bool,
    },

    #[error("invalid Wolodzko-Javor triple: {0}")]
    InvalidTriple(String),

    #[error("element is not in the range of S")]
    NotInRange,

    #[error("supplied elements are not mutually orthogonal idempotents")]
    NotOrthogonalIdempotents,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
