//! Horizontal space of the Grassmann quotient `St(p, m)/O(p)` at a Stiefel
//! representative: matrices `ξ` with `Xᵀξ = 0`.

use crate::error::{Error, Result};
use crate::matlin::DenseMatrix;

use super::StiefelPoint;

/// `(I − XXᵀ)Z`.
pub fn gr_horizontal_project(x: &StiefelPoint, z: &DenseMatrix) -> Result<DenseMatrix> {
    let xm = x.matrix();
    if xm.shape() != z.shape() {
        return Err(Error::ShapeMismatch {
            expected: xm.shape(),
            found: z.shape(),
        });
    }
    Ok(project_raw(xm, z))
}

pub(crate) fn project_raw(x: &DenseMatrix, z: &DenseMatrix) -> DenseMatrix {
    z.sub(&x.matmul(&x.t_matmul(z)))
}

/// `‖Xᵀξ‖_F`.
pub fn horizontal_violation(x: &StiefelPoint, xi: &DenseMatrix) -> f64 {
    x.matrix().t_matmul(xi).norm_fro()
}
