//! Riemannian geometry of the matrix manifolds the solvers run on.
//!
//! Points and tangent vectors are carried as [`DenseMatrix`] values. The
//! [`Manifold`] trait is what the solvers see; the typed wrappers
//! ([`StiefelPoint`], [`StiefelTangent`], [`SpdPoint`], [`SpdTangent`]) and
//! the free functions in the submodules are the checked public surface.

mod grassmann;
mod spd;
mod stiefel;

pub use grassmann::{gr_horizontal_project, horizontal_violation};
pub(crate) use grassmann::project_raw as horizontal_project_raw;
pub use spd::{spd_inner, spd_retract, spd_transport, Spd, SpdPoint, SpdRetraction, SpdTangent};
pub use stiefel::{
    st_inner, st_project, st_retract, st_transport, Stiefel, StiefelPoint, StiefelTangent,
};

use crate::error::Result;
use crate::matlin::{sqrt, DenseMatrix};

/// Absolute tolerance for point and tangency invariants on unit-scaled data.
pub const INVARIANT_TOL: f64 = 1e-10;

/// Which manifold, with its size parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ManifoldKind {
    /// `St(p, m)`: `m x p` matrices with orthonormal columns.
    Stiefel { m: usize, p: usize },
    /// `m x m` symmetric positive definite matrices.
    Spd { m: usize },
    /// `Grass(p, m)` through horizontal lifts at Stiefel representatives.
    GrassmannHorizontal { m: usize, p: usize },
}

impl ManifoldKind {
    pub fn dim(self) -> usize {
        manifold_dim(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ManifoldMeta {
    pub kind: ManifoldKind,
    pub dim: usize,
}

impl From<ManifoldKind> for ManifoldMeta {
    fn from(kind: ManifoldKind) -> Self {
        ManifoldMeta {
            kind,
            dim: manifold_dim(kind),
        }
    }
}

/// Intrinsic dimension: `mp − p(p+1)/2`, `m(m+1)/2` or `p(m−p)`.
pub fn manifold_dim(kind: ManifoldKind) -> usize {
    match kind {
        ManifoldKind::Stiefel { m, p } => m * p - p * (p + 1) / 2,
        ManifoldKind::Spd { m } => m * (m + 1) / 2,
        ManifoldKind::GrassmannHorizontal { m, p } => p * (m - p),
    }
}

/// Geometry needed by the solvers.
///
/// Tangent vectors are plain matrices; `transport(from, to, ξ)` moves `ξ`
/// from `from` to `to`, where `to` is the retraction of some tangent vector
/// at `from`.
pub trait Manifold {
    type Point: Clone;

    fn meta(&self) -> ManifoldMeta;

    fn dim(&self) -> usize {
        self.meta().dim
    }

    fn matrix<'a>(&self, x: &'a Self::Point) -> &'a DenseMatrix;

    fn inner(&self, x: &Self::Point, a: &DenseMatrix, b: &DenseMatrix) -> Result<f64>;

    fn norm(&self, x: &Self::Point, a: &DenseMatrix) -> Result<f64> {
        Ok(sqrt(self.inner(x, a, a)?.max(0.0)))
    }

    fn retract(&self, x: &Self::Point, xi: &DenseMatrix) -> Result<Self::Point>;

    fn transport(&self, from: &Self::Point, to: &Self::Point, xi: &DenseMatrix) -> DenseMatrix;

    /// Distance of `x` from satisfying the point invariant (0 when exact).
    fn feasibility_error(&self, x: &Self::Point) -> f64;

    /// Re-projects `x` onto the manifold if its invariant has drifted past
    /// [`INVARIANT_TOL`]; the flag reports whether that happened.
    fn restore(&self, x: Self::Point) -> Result<(Self::Point, bool)>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_match_reported_tables() {
        assert_eq!(manifold_dim(ManifoldKind::Stiefel { m: 1000, p: 30 }), 29535);
        assert_eq!(manifold_dim(ManifoldKind::Stiefel { m: 200, p: 30 }), 5535);
        assert_eq!(manifold_dim(ManifoldKind::Spd { m: 100 }), 5050);
        assert_eq!(manifold_dim(ManifoldKind::GrassmannHorizontal { m: 200, p: 10 }), 1900);
        assert_eq!(ManifoldMeta::from(ManifoldKind::Spd { m: 3 }).dim, 6);
    }
}
