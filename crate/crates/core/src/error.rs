use thiserror::Error;

/// Errors raised by the matrix kernel, the geometry and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("matrix has linearly dependent columns (pivot {pivot:e} below floor {floor:e})")]
    RankDeficient { pivot: f64, floor: f64 },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("shape mismatch: expected {expected:?}, got {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix must have at least one row and one column and finite entries")]
    InvalidMatrix,
    #[error("tangent vectors are based at different points")]
    BaseMismatch,
    #[error("point is not on the manifold (violation {violation:e})")]
    InvalidPoint { violation: f64 },
    #[error("vector is not tangent at its base point (violation {violation:e})")]
    NotTangent { violation: f64 },
    #[error("vector is not horizontal (violation {violation:e})")]
    NotHorizontal { violation: f64 },
    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("SPD retraction failed after {halvings} step halvings")]
    RetractionFailed { halvings: usize },
    #[error("denominator {value:e} too close to zero")]
    DegenerateDenominator { value: f64 },
    #[error("division by a vanishing previous residual norm {value:e}")]
    DivideByZero { value: f64 },
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("non-monotone invariant violated at iteration {iteration}: {what}")]
    InvariantViolated {
        iteration: usize,
        what: &'static str,
    },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
