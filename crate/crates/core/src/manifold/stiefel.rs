//! Compact Stiefel manifold `St(p, m)` with the embedded metric `tr(ξᵀη)`,
//! the QR retraction and the projection-based vector transport.

use crate::error::{Error, Result};
use crate::matlin::{qf, DenseMatrix};

use super::{Manifold, ManifoldKind, ManifoldMeta, INVARIANT_TOL};

/// `St(p, m)` for fixed `m > p ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stiefel {
    m: usize,
    p: usize,
}

impl Stiefel {
    pub fn new(m: usize, p: usize) -> Result<Self> {
        if p == 0 || m <= p {
            return Err(Error::InvalidDimensions("Stiefel manifold needs m > p >= 1"));
        }
        Ok(Stiefel { m, p })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }
}

/// An `m x p` matrix with orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct StiefelPoint(DenseMatrix);

/// `‖XᵀX − I‖_F`.
fn orthonormality_error(x: &DenseMatrix) -> f64 {
    let mut g = x.t_matmul(x);
    for i in 0..g.rows() {
        g[(i, i)] -= 1.0;
    }
    g.norm_fro()
}

impl StiefelPoint {
    /// Wraps `x` after checking `‖XᵀX − I‖_F ≤ 1e-10`.
    pub fn new(x: DenseMatrix) -> Result<Self> {
        if x.cols() >= x.rows() {
            return Err(Error::InvalidDimensions("Stiefel point needs more rows than columns"));
        }
        let violation = orthonormality_error(&x);
        if !(violation <= INVARIANT_TOL) {
            return Err(Error::InvalidPoint { violation });
        }
        Ok(StiefelPoint(x))
    }

    /// The Q factor of a full-column-rank matrix.
    pub fn from_qf(m: &DenseMatrix) -> Result<Self> {
        Self::new(qf(m)?.q)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.0
    }

    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.0)
    }

    /// Right multiplication by a `p x p` matrix; the caller guarantees it is
    /// orthogonal.
    pub fn rotate(&self, q: &DenseMatrix) -> Result<Self> {
        Self::new(self.0.matmul(q))
    }
}

/// A tangent vector `Z` at a Stiefel point (`XᵀZ` antisymmetric).
#[derive(Clone, Debug)]
pub struct StiefelTangent {
    base: StiefelPoint,
    z: DenseMatrix,
}

fn check_shape(x: &DenseMatrix, z: &DenseMatrix) -> Result<()> {
    if x.shape() != z.shape() {
        return Err(Error::ShapeMismatch {
            expected: x.shape(),
            found: z.shape(),
        });
    }
    Ok(())
}

impl StiefelTangent {
    /// Wraps `z` after checking `‖sym(XᵀZ)‖_F ≤ 1e-10·max(1, ‖Z‖_F)`.
    pub fn new(base: StiefelPoint, z: DenseMatrix) -> Result<Self> {
        check_shape(base.matrix(), &z)?;
        let violation = base.matrix().t_matmul(&z).sym().norm_fro();
        if !(violation <= INVARIANT_TOL * z.norm_fro().max(1.0)) {
            return Err(Error::NotTangent { violation });
        }
        Ok(StiefelTangent { base, z })
    }

    pub fn zero(base: StiefelPoint) -> Self {
        let (m, p) = base.matrix().shape();
        StiefelTangent {
            base,
            z: DenseMatrix::zeros(m, p),
        }
    }

    pub fn base(&self) -> &StiefelPoint {
        &self.base
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.z
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.z
    }
}

/// `tr(ξᵀη)`.
pub fn st_inner(xi: &StiefelTangent, eta: &StiefelTangent) -> Result<f64> {
    if xi.base != eta.base {
        return Err(Error::BaseMismatch);
    }
    Ok(xi.z.dot(&eta.z))
}

/// `Z − X sym(XᵀZ)`, the orthogonal projection onto `T_X St(p, m)`.
pub fn st_project(x: &StiefelPoint, z: &DenseMatrix) -> Result<StiefelTangent> {
    check_shape(x.matrix(), z)?;
    Ok(StiefelTangent {
        base: x.clone(),
        z: project_raw(x.matrix(), z),
    })
}

pub(crate) fn project_raw(x: &DenseMatrix, z: &DenseMatrix) -> DenseMatrix {
    let s = x.t_matmul(z).sym();
    z.sub(&x.matmul(&s))
}

/// `qf(X + ξ)`.
pub fn st_retract(x: &StiefelPoint, xi: &StiefelTangent) -> Result<StiefelPoint> {
    if &xi.base != x {
        return Err(Error::BaseMismatch);
    }
    retract_raw(x.matrix(), &xi.z)
}

fn retract_raw(x: &DenseMatrix, xi: &DenseMatrix) -> Result<StiefelPoint> {
    // qf keeps orthonormality to round-off; StiefelPoint::new would reject
    // the rare drift that `restore` exists to repair.
    if xi.max_abs() == 0.0 {
        return Ok(StiefelPoint(x.clone()));
    }
    Ok(StiefelPoint(qf(&x.add(xi))?.q))
}

/// Transports `ξ` to `Y = R_X(η)` by projecting onto `T_Y St(p, m)`.
pub fn st_transport(
    x: &StiefelPoint,
    eta: &StiefelTangent,
    xi: &StiefelTangent,
) -> Result<StiefelTangent> {
    if &xi.base != x {
        return Err(Error::BaseMismatch);
    }
    let y = st_retract(x, eta)?;
    let z = project_raw(y.matrix(), &xi.z);
    Ok(StiefelTangent { base: y, z })
}

impl Manifold for Stiefel {
    type Point = StiefelPoint;

    fn meta(&self) -> ManifoldMeta {
        ManifoldKind::Stiefel {
            m: self.m,
            p: self.p,
        }
        .into()
    }

    fn matrix<'a>(&self, x: &'a StiefelPoint) -> &'a DenseMatrix {
        &x.0
    }

    fn inner(&self, _x: &StiefelPoint, a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
        Ok(a.dot(b))
    }

    fn norm(&self, _x: &StiefelPoint, a: &DenseMatrix) -> Result<f64> {
        Ok(a.norm_fro())
    }

    fn retract(&self, x: &StiefelPoint, xi: &DenseMatrix) -> Result<StiefelPoint> {
        retract_raw(&x.0, xi)
    }

    fn transport(&self, from: &StiefelPoint, to: &StiefelPoint, xi: &DenseMatrix) -> DenseMatrix {
        if from == to {
            return xi.clone();
        }
        project_raw(&to.0, xi)
    }

    fn feasibility_error(&self, x: &StiefelPoint) -> f64 {
        x.orthonormality_error()
    }

    fn restore(&self, x: StiefelPoint) -> Result<(StiefelPoint, bool)> {
        if x.orthonormality_error() <= INVARIANT_TOL {
            Ok((x, false))
        } else {
            Ok((StiefelPoint(qf(&x.0)?.q), true))
        }
    }
}
