//! Tangent vector fields whose zeros the solvers look for.
//!
//! A field evaluates to a tangent vector at the query point. The merit
//! function is `f(X) = ½‖F(X)‖²` in the manifold's own metric. Fields on the
//! Stiefel manifold that are already horizontal can also expose the
//! horizontal lift of their Grassmann Jacobian for the Newton phase.

mod logdet;
mod oja;
mod trace_ratio;

pub use logdet::{logdet_eval, logdet_residual_closed_form, LogDetField};
pub use oja::{oja_eval, oja_jac_lift, OjaField, OjaJacobian};
pub use trace_ratio::{
    trace_ratio_eval, trace_ratio_jac_lift, TraceRatioField, TraceRatioJacobian,
};

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Stiefel, StiefelPoint};
use crate::matlin::DenseMatrix;

/// Point type of a field's manifold.
pub type PointOf<F> = <<F as VectorField>::Manifold as Manifold>::Point;

/// `F(X)` with its Riemannian norm.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldValue {
    pub tangent: DenseMatrix,
    pub norm: f64,
}

impl FieldValue {
    /// `½‖F(X)‖²`.
    pub fn merit(&self) -> f64 {
        0.5 * self.norm * self.norm
    }
}

pub trait VectorField {
    type Manifold: Manifold;

    fn manifold(&self) -> &Self::Manifold;

    /// `F(X)` as a matrix in `T_X M`.
    fn eval(&self, x: &PointOf<Self>) -> Result<DenseMatrix>;

    fn value(&self, x: &PointOf<Self>) -> Result<FieldValue> {
        let tangent = self.eval(x)?;
        let norm = self.manifold().norm(x, &tangent)?;
        Ok(FieldValue { tangent, norm })
    }
}

/// A linear map on the horizontal space at a fixed Stiefel representative.
pub trait HorizontalOperator {
    fn apply(&self, xi: &DenseMatrix) -> DenseMatrix;
}

/// Stiefel fields whose Grassmann restriction has a horizontal Jacobian lift.
pub trait HorizontalJacobian: VectorField<Manifold = Stiefel> {
    type Jacobian<'a>: HorizontalOperator
    where
        Self: 'a;

    /// Linearizes the field at `x`; the operator can then be applied many
    /// times at the cost of one matrix product each.
    fn jacobian<'a>(&'a self, x: &StiefelPoint) -> Result<Self::Jacobian<'a>>;
}

/// `‖F(X)‖` in the manifold metric.
pub fn residual_norm<F: VectorField>(field: &F, x: &PointOf<F>) -> Result<f64> {
    Ok(field.value(x)?.norm)
}

/// `(F(R_X(hξ)) − 𝒯_{hξ} F(X)) / h`, given `F(X)` already evaluated.
pub(crate) fn transported_difference<F: VectorField>(
    field: &F,
    x: &PointOf<F>,
    fx: &DenseMatrix,
    xi: &DenseMatrix,
    h: f64,
) -> Result<(DenseMatrix, PointOf<F>)> {
    let m = field.manifold();
    let y = m.retract(x, &xi.scale(h))?;
    let fy = field.eval(&y)?;
    let moved = m.transport(x, &y, fx);
    Ok((fy.sub(&moved).scale(1.0 / h), y))
}

/// One-sided transported difference quotient of `F` along `ξ`, as used by
/// the initial step-length heuristic.
pub fn fd_field_derivative<F: VectorField>(
    field: &F,
    x: &PointOf<F>,
    xi: &DenseMatrix,
    h: f64,
) -> Result<DenseMatrix> {
    if !(h > 0.0) {
        return Err(Error::InvalidConfig("finite-difference step must be positive"));
    }
    let fx = field.eval(x)?;
    Ok(transported_difference(field, x, &fx, xi, h)?.0)
}

/// `(F(R_X(hξ)) − F(R_X(−hξ))) / 2h` in the ambient space.
pub fn central_fd_derivative<F: VectorField>(
    field: &F,
    x: &PointOf<F>,
    xi: &DenseMatrix,
    h: f64,
) -> Result<DenseMatrix> {
    if !(h > 0.0) {
        return Err(Error::InvalidConfig("finite-difference step must be positive"));
    }
    let m = field.manifold();
    let plus = field.eval(&m.retract(x, &xi.scale(h))?)?;
    let minus = field.eval(&m.retract(x, &xi.scale(-h))?)?;
    Ok(plus.sub(&minus).scale(0.5 / h))
}

pub(crate) fn check_symmetric(s: &DenseMatrix) -> Result<()> {
    if !s.is_square() {
        return Err(Error::NonSquare {
            rows: s.rows(),
            cols: s.cols(),
        });
    }
    let asymmetry = s.asymmetry();
    if !(asymmetry <= 1e-12 * s.norm_fro().max(1.0)) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(())
}

pub(crate) fn check_conformal(s: &DenseMatrix, x: &DenseMatrix) -> Result<()> {
    if s.cols() != x.rows() {
        return Err(Error::ShapeMismatch {
            expected: (s.cols(), x.cols()),
            found: x.shape(),
        });
    }
    Ok(())
}

/// Rejects `ξ` with `‖Xᵀξ‖ > 1e-8‖ξ‖`.
pub(crate) fn check_horizontal(x: &StiefelPoint, xi: &DenseMatrix) -> Result<()> {
    if x.matrix().shape() != xi.shape() {
        return Err(Error::ShapeMismatch {
            expected: x.matrix().shape(),
            found: xi.shape(),
        });
    }
    let violation = crate::manifold::horizontal_violation(x, xi);
    if violation > 1e-8 * xi.norm_fro() {
        return Err(Error::NotHorizontal { violation });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{gr_horizontal_project, Spd, SpdPoint};
    use crate::testing::{gaussian, orthonormal, random_spd, random_symmetric, rng};

    #[test]
    fn fd_derivative_of_zero_direction_vanishes() {
        let mut r = rng(1);
        let field = OjaField::new(random_spd(&mut r, 5), 2).unwrap();
        let x = StiefelPoint::new(orthonormal(&mut r, 5, 2)).unwrap();
        let d = fd_field_derivative(&field, &x, &DenseMatrix::zeros(5, 2), 1e-8).unwrap();
        assert_eq!(d.max_abs(), 0.0);
        assert!(fd_field_derivative(&field, &x, &DenseMatrix::zeros(5, 2), 0.0).is_err());
    }

    #[test]
    fn fd_derivative_matches_oja_lift() {
        let mut r = rng(2);
        let a = DenseMatrix::from_diag(&[0.3, 0.7, 1.1]);
        let field = OjaField::new(a.clone(), 1).unwrap();
        let x = StiefelPoint::new(orthonormal(&mut r, 3, 1)).unwrap();
        let xi = gr_horizontal_project(&x, &gaussian(&mut r, 3, 1)).unwrap();
        let fd = fd_field_derivative(&field, &x, &xi, 1e-7).unwrap();
        let fd = gr_horizontal_project(&x, &fd).unwrap();
        let lift = oja_jac_lift(&a, &x, &xi).unwrap();
        assert!(fd.sub(&lift).norm_fro() <= 1e-4 * lift.norm_fro());
    }

    #[test]
    fn one_sided_error_shrinks_with_step() {
        let mut r = rng(3);
        let space = Spd::new(4).unwrap();
        let field = LogDetField::new(space);
        let x = SpdPoint::new(random_spd(&mut r, 4)).unwrap();
        let xi = random_symmetric(&mut r, 4);
        let reference = central_fd_derivative(&field, &x, &xi, 1e-5).unwrap();
        let errors: alloc::vec::Vec<f64> = [1e-4, 1e-5, 1e-6, 1e-7]
            .iter()
            .map(|&h| {
                fd_field_derivative(&field, &x, &xi, h)
                    .unwrap()
                    .sub(&reference)
                    .norm_fro()
            })
            .collect();
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    }
}
