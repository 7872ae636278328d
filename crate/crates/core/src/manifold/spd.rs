//! Symmetric positive definite matrices with the affine-invariant metric
//! `tr(ξ X⁻¹ η X⁻¹)`, an SPD-preserving retraction and identity transport.

use crate::error::{Error, Result};
use crate::matlin::{Cholesky, DenseMatrix};

use super::{Manifold, ManifoldKind, ManifoldMeta};

const SYMMETRY_TOL: f64 = 1e-12;
const MAX_HALVINGS: usize = 30;

/// Retraction used on the SPD cone.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SpdRetraction {
    /// `X + ξ + ½ ξ X⁻¹ ξ`; SPD for every symmetric `ξ`.
    #[default]
    SecondOrder,
    /// `X + ξ`, halving `ξ` (up to 30 times) until the result is SPD.
    Additive,
}

/// The SPD manifold of size `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Spd {
    m: usize,
    retraction: SpdRetraction,
}

impl Spd {
    pub fn new(m: usize) -> Result<Self> {
        Self::with_retraction(m, SpdRetraction::default())
    }

    pub fn with_retraction(m: usize, retraction: SpdRetraction) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDimensions("SPD manifold needs m >= 1"));
        }
        Ok(Spd { m, retraction })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn retraction(&self) -> SpdRetraction {
        self.retraction
    }
}

/// A symmetric positive definite matrix together with its Cholesky factor.
#[derive(Clone, Debug)]
pub struct SpdPoint {
    x: DenseMatrix,
    chol: Cholesky,
}

impl PartialEq for SpdPoint {
    fn eq(&self, other: &Self) -> bool {
        self.x == other.x
    }
}

impl SpdPoint {
    /// Checks symmetry (to 1e-12, relative to `max(1, ‖X‖)`) and positive
    /// definiteness, then stores an exactly symmetric copy.
    pub fn new(mut x: DenseMatrix) -> Result<Self> {
        if !x.is_square() {
            return Err(Error::NonSquare {
                rows: x.rows(),
                cols: x.cols(),
            });
        }
        let asymmetry = x.asymmetry();
        if !(asymmetry <= SYMMETRY_TOL * x.norm_fro().max(1.0)) {
            return Err(Error::NotSymmetric { asymmetry });
        }
        x.symmetrize();
        let chol = Cholesky::new(&x)?;
        Ok(SpdPoint { x, chol })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.x
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    pub fn ln_det(&self) -> f64 {
        self.chol.ln_det()
    }

    /// `X⁻¹ B`.
    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        self.chol.solve(b)
    }
}

/// A symmetric matrix viewed as a tangent vector at an SPD point.
#[derive(Clone, Debug)]
pub struct SpdTangent {
    base: SpdPoint,
    z: DenseMatrix,
}

impl SpdTangent {
    pub fn new(base: SpdPoint, mut z: DenseMatrix) -> Result<Self> {
        if base.x.shape() != z.shape() {
            return Err(Error::ShapeMismatch {
                expected: base.x.shape(),
                found: z.shape(),
            });
        }
        let asymmetry = z.asymmetry();
        if !(asymmetry <= SYMMETRY_TOL * z.norm_fro().max(1.0)) {
            return Err(Error::NotSymmetric { asymmetry });
        }
        z.symmetrize();
        Ok(SpdTangent { base, z })
    }

    pub fn base(&self) -> &SpdPoint {
        &self.base
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.z
    }
}

fn metric(x: &SpdPoint, a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    let xa = x.solve(a)?;
    let xb = if core::ptr::eq(a, b) { xa.clone() } else { x.solve(b)? };
    // tr(PQ) = Σ_ij P_ij Q_ji
    let n = xa.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += xa[(i, j)] * xb[(j, i)];
        }
    }
    Ok(s)
}

/// `tr((X⁻¹ξ)(X⁻¹η))`.
pub fn spd_inner(x: &SpdPoint, xi: &SpdTangent, eta: &SpdTangent) -> Result<f64> {
    if &xi.base != x || &eta.base != x {
        return Err(Error::BaseMismatch);
    }
    metric(x, &xi.z, &eta.z)
}

fn retract_raw(x: &SpdPoint, xi: &DenseMatrix, mode: SpdRetraction) -> Result<SpdPoint> {
    match mode {
        SpdRetraction::SecondOrder => {
            let correction = xi.matmul(&x.solve(xi)?);
            let mut y = x.x.add(xi);
            y.axpy(0.5, &correction);
            y.symmetrize();
            let chol = Cholesky::new(&y)?;
            Ok(SpdPoint { x: y, chol })
        }
        SpdRetraction::Additive => {
            let mut step = xi.clone();
            for _ in 0..=MAX_HALVINGS {
                let mut y = x.x.add(&step);
                y.symmetrize();
                if let Ok(chol) = Cholesky::new(&y) {
                    return Ok(SpdPoint { x: y, chol });
                }
                step = step.scale(0.5);
            }
            Err(Error::RetractionFailed {
                halvings: MAX_HALVINGS,
            })
        }
    }
}

/// Retracts `ξ` at `X` with the chosen mode.
pub fn spd_retract(x: &SpdPoint, xi: &SpdTangent, mode: SpdRetraction) -> Result<SpdPoint> {
    if &xi.base != x {
        return Err(Error::BaseMismatch);
    }
    retract_raw(x, &xi.z, mode)
}

/// Identity transport: the same matrix, rebased at `R_X(η)`.
pub fn spd_transport(eta: &SpdTangent, xi: &SpdTangent, mode: SpdRetraction) -> Result<SpdTangent> {
    if eta.base != xi.base {
        return Err(Error::BaseMismatch);
    }
    let y = retract_raw(&eta.base, &eta.z, mode)?;
    Ok(SpdTangent {
        base: y,
        z: xi.z.clone(),
    })
}

impl Manifold for Spd {
    type Point = SpdPoint;

    fn meta(&self) -> ManifoldMeta {
        ManifoldKind::Spd { m: self.m }.into()
    }

    fn matrix<'a>(&self, x: &'a SpdPoint) -> &'a DenseMatrix {
        &x.x
    }

    fn inner(&self, x: &SpdPoint, a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
        metric(x, a, b)
    }

    fn retract(&self, x: &SpdPoint, xi: &DenseMatrix) -> Result<SpdPoint> {
        retract_raw(x, xi, self.retraction)
    }

    fn transport(&self, _from: &SpdPoint, _to: &SpdPoint, xi: &DenseMatrix) -> DenseMatrix {
        xi.clone()
    }

    fn feasibility_error(&self, x: &SpdPoint) -> f64 {
        // Positive definiteness is certified by the stored factor.
        x.x.asymmetry()
    }

    fn restore(&self, x: SpdPoint) -> Result<(SpdPoint, bool)> {
        Ok((x, false))
    }
}
