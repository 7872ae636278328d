//! Oja's field `F(X) = AX − XXᵀAX` on `St(p, m)`.

use crate::error::{Error, Result};
use crate::manifold::{horizontal_project_raw, Manifold, Stiefel, StiefelPoint};
use crate::matlin::DenseMatrix;

use super::{
    check_conformal, check_horizontal, check_symmetric, FieldValue, HorizontalJacobian,
    HorizontalOperator, VectorField,
};

/// Oja's field for a symmetric `m x m` matrix `A`.
#[derive(Clone, Debug)]
pub struct OjaField {
    a: DenseMatrix,
    manifold: Stiefel,
}

impl OjaField {
    pub fn new(a: DenseMatrix, p: usize) -> Result<Self> {
        check_symmetric(&a)?;
        let manifold = Stiefel::new(a.rows(), p)?;
        Ok(OjaField { a, manifold })
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }
}

fn eval_raw(a: &DenseMatrix, x: &DenseMatrix) -> DenseMatrix {
    let ax = a.matmul(x);
    let s = x.t_matmul(&ax);
    ax.sub(&x.matmul(&s))
}

/// `AX − X(XᵀAX)`.
pub fn oja_eval(a: &DenseMatrix, x: &StiefelPoint) -> Result<FieldValue> {
    check_symmetric(a)?;
    check_conformal(a, x.matrix())?;
    let tangent = eval_raw(a, x.matrix());
    let norm = tangent.norm_fro();
    Ok(FieldValue { tangent, norm })
}

/// Horizontal lift of the Grassmann Jacobian: `(I − XXᵀ)(Aξ − ξXᵀAX)`.
pub fn oja_jac_lift(a: &DenseMatrix, x: &StiefelPoint, xi: &DenseMatrix) -> Result<DenseMatrix> {
    check_conformal(a, x.matrix())?;
    check_horizontal(x, xi)?;
    Ok(OjaJacobian::at(a, x).apply(xi))
}

impl VectorField for OjaField {
    type Manifold = Stiefel;

    fn manifold(&self) -> &Stiefel {
        &self.manifold
    }

    fn eval(&self, x: &StiefelPoint) -> Result<DenseMatrix> {
        if x.matrix().shape() != (self.manifold.m(), self.manifold.p()) {
            return Err(Error::ShapeMismatch {
                expected: (self.manifold.m(), self.manifold.p()),
                found: x.matrix().shape(),
            });
        }
        Ok(eval_raw(&self.a, self.manifold.matrix(x)))
    }
}

/// Oja Jacobian linearized at a fixed representative.
pub struct OjaJacobian<'a> {
    a: &'a DenseMatrix,
    x: DenseMatrix,
    /// `XᵀAX`
    rayleigh: DenseMatrix,
}

impl<'a> OjaJacobian<'a> {
    fn at(a: &'a DenseMatrix, x: &StiefelPoint) -> Self {
        let xm = x.matrix().clone();
        let rayleigh = xm.t_matmul(&a.matmul(&xm));
        OjaJacobian { a, x: xm, rayleigh }
    }
}

impl HorizontalOperator for OjaJacobian<'_> {
    fn apply(&self, xi: &DenseMatrix) -> DenseMatrix {
        let v = self.a.matmul(xi).sub(&xi.matmul(&self.rayleigh));
        horizontal_project_raw(&self.x, &v)
    }
}

impl HorizontalJacobian for OjaField {
    type Jacobian<'a> = OjaJacobian<'a>;

    fn jacobian<'a>(&'a self, x: &StiefelPoint) -> Result<OjaJacobian<'a>> {
        check_conformal(&self.a, x.matrix())?;
        Ok(OjaJacobian::at(&self.a, x))
    }
}
