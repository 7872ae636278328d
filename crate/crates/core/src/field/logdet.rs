//! Monotone field `F(X) = 2 ln det(X) X` on the SPD cone.

use crate::error::Result;
use crate::manifold::{Manifold, Spd, SpdPoint};
use crate::matlin::{abs, sqrt, DenseMatrix};

use super::{FieldValue, VectorField};

#[derive(Clone, Copy, Debug)]
pub struct LogDetField {
    manifold: Spd,
}

impl LogDetField {
    pub fn new(manifold: Spd) -> Self {
        LogDetField { manifold }
    }
}

/// `2 ln det(X) X` with its norm in the affine-invariant metric.
pub fn logdet_eval(x: &SpdPoint) -> Result<FieldValue> {
    let tangent = x.matrix().scale(2.0 * x.ln_det());
    let m = Spd::new(x.matrix().rows())?;
    let norm = m.norm(x, &tangent)?;
    Ok(FieldValue { tangent, norm })
}

/// `2√m |ln det X|`, which the metric norm of the field collapses to.
pub fn logdet_residual_closed_form(x: &SpdPoint) -> f64 {
    2.0 * sqrt(x.matrix().rows() as f64) * abs(x.ln_det())
}

impl VectorField for LogDetField {
    type Manifold = Spd;

    fn manifold(&self) -> &Spd {
        &self.manifold
    }

    fn eval(&self, x: &SpdPoint) -> Result<DenseMatrix> {
        Ok(x.matrix().scale(2.0 * x.ln_det()))
    }
}
