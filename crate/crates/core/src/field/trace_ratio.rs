//! Trace-ratio field `F(X) = E(X)X − X(XᵀE(X)X)` with
//! `E(X) = A/φ_B − B φ_A/φ_B² + C` and `φ_S(X) = tr(XᵀSX)`.

use crate::error::{Error, Result};
use crate::manifold::{horizontal_project_raw, Stiefel, StiefelPoint};
use crate::matlin::{Cholesky, DenseMatrix};

use super::{
    check_conformal, check_horizontal, check_symmetric, FieldValue, HorizontalJacobian,
    HorizontalOperator, VectorField,
};

const DENOMINATOR_FLOOR: f64 = 1e-13;

/// First-order optimality field of the trace-ratio problem.
#[derive(Clone, Debug)]
pub struct TraceRatioField {
    a: DenseMatrix,
    b: DenseMatrix,
    c: DenseMatrix,
    manifold: Stiefel,
}

impl TraceRatioField {
    /// `A`, `B`, `C` symmetric and `B` positive definite.
    pub fn new(a: DenseMatrix, b: DenseMatrix, c: DenseMatrix, p: usize) -> Result<Self> {
        check_matrices(&a, &b, &c)?;
        Cholesky::new(&b)?;
        let manifold = Stiefel::new(a.rows(), p)?;
        Ok(TraceRatioField { a, b, c, manifold })
    }

    pub fn matrices(&self) -> (&DenseMatrix, &DenseMatrix, &DenseMatrix) {
        (&self.a, &self.b, &self.c)
    }
}

fn check_matrices(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix) -> Result<()> {
    for s in [a, b, c] {
        check_symmetric(s)?;
        if s.shape() != a.shape() {
            return Err(Error::ShapeMismatch {
                expected: a.shape(),
                found: s.shape(),
            });
        }
    }
    Ok(())
}

/// Quantities shared by the value and the Jacobian at one point.
struct Linearization {
    x: DenseMatrix,
    ax: DenseMatrix,
    bx: DenseMatrix,
    phi_a: f64,
    phi_b: f64,
    e: DenseMatrix,
    /// `XᵀE(X)X`
    exx: DenseMatrix,
}

impl Linearization {
    fn at(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix, x: &DenseMatrix) -> Result<Self> {
        let ax = a.matmul(x);
        let bx = b.matmul(x);
        let phi_a = x.dot(&ax);
        let phi_b = x.dot(&bx);
        if !(phi_b > DENOMINATOR_FLOOR) {
            return Err(Error::DegenerateDenominator { value: phi_b });
        }
        let mut e = a.scale(1.0 / phi_b);
        e.axpy(-phi_a / (phi_b * phi_b), b);
        e.axpy(1.0, c);
        let exx = x.t_matmul(&e.matmul(x));
        Ok(Linearization {
            x: x.clone(),
            ax,
            bx,
            phi_a,
            phi_b,
            e,
            exx,
        })
    }

    fn value(&self) -> DenseMatrix {
        self.e.matmul(&self.x).sub(&self.x.matmul(&self.exx))
    }
}

/// Evaluates the trace-ratio field at `x`.
pub fn trace_ratio_eval(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    x: &StiefelPoint,
) -> Result<FieldValue> {
    check_matrices(a, b, c)?;
    check_conformal(a, x.matrix())?;
    let tangent = Linearization::at(a, b, c, x.matrix())?.value();
    let norm = tangent.norm_fro();
    Ok(FieldValue { tangent, norm })
}

/// Horizontal Jacobian lift `(I − XXᵀ)(E(X)ξ + G(X,ξ)X − ξXᵀE(X)X)`.
pub fn trace_ratio_jac_lift(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    x: &StiefelPoint,
    xi: &DenseMatrix,
) -> Result<DenseMatrix> {
    check_matrices(a, b, c)?;
    check_conformal(a, x.matrix())?;
    check_horizontal(x, xi)?;
    Ok(TraceRatioJacobian {
        lin: Linearization::at(a, b, c, x.matrix())?,
    }
    .apply(xi))
}

impl VectorField for TraceRatioField {
    type Manifold = Stiefel;

    fn manifold(&self) -> &Stiefel {
        &self.manifold
    }

    fn eval(&self, x: &StiefelPoint) -> Result<DenseMatrix> {
        check_conformal(&self.a, x.matrix())?;
        Ok(Linearization::at(&self.a, &self.b, &self.c, x.matrix())?.value())
    }
}

/// Trace-ratio Jacobian linearized at a fixed representative.
pub struct TraceRatioJacobian {
    lin: Linearization,
}

impl HorizontalOperator for TraceRatioJacobian {
    fn apply(&self, xi: &DenseMatrix) -> DenseMatrix {
        let l = &self.lin;
        // φ'_S(X; ξ) = 2 tr(XᵀSξ) = 2⟨SX, ξ⟩ for symmetric S
        let dphi_a = 2.0 * l.ax.dot(xi);
        let dphi_b = 2.0 * l.bx.dot(xi);
        let pb2 = l.phi_b * l.phi_b;
        let coef_a = -dphi_b / pb2;
        let coef_b = -(dphi_a * pb2 - 2.0 * l.phi_b * dphi_b * l.phi_a) / (pb2 * pb2);
        let mut v = l.e.matmul(xi);
        v.axpy(coef_a, &l.ax);
        v.axpy(coef_b, &l.bx);
        v.axpy(-1.0, &xi.matmul(&l.exx));
        horizontal_project_raw(&l.x, &v)
    }
}

impl HorizontalJacobian for TraceRatioField {
    type Jacobian<'a> = TraceRatioJacobian;

    fn jacobian<'a>(&'a self, x: &StiefelPoint) -> Result<TraceRatioJacobian> {
        check_conformal(&self.a, x.matrix())?;
        Ok(TraceRatioJacobian {
            lin: Linearization::at(&self.a, &self.b, &self.c, x.matrix())?,
        })
    }
}
