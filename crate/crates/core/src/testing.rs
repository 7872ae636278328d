//! Shared helpers for unit tests.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::field::VectorField;
use crate::manifold::{Manifold, ManifoldKind, ManifoldMeta};
use crate::matlin::{qf, DenseMatrix};

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub(crate) fn orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    qf(&gaussian(rng, rows, cols)).unwrap().q
}

pub(crate) fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let w = orthonormal(rng, n, n);
    let d: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
    let mut x = w.scale_columns(&d).matmul_t(&w);
    x.symmetrize();
    x
}

pub(crate) fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let mut s = gaussian(rng, n, n);
    s.symmetrize();
    s
}

/// Flat `R^{rows x cols}` with the Frobenius metric; retraction `X + ξ`.
#[derive(Clone, Debug)]
pub(crate) struct Euclidean {
    pub rows: usize,
    pub cols: usize,
}

impl Manifold for Euclidean {
    type Point = DenseMatrix;

    fn meta(&self) -> ManifoldMeta {
        // Only the dimension is meaningful here.
        ManifoldMeta {
            kind: ManifoldKind::Spd { m: 1 },
            dim: self.rows * self.cols,
        }
    }

    fn matrix<'a>(&self, x: &'a DenseMatrix) -> &'a DenseMatrix {
        x
    }

    fn inner(&self, _x: &DenseMatrix, a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
        Ok(a.dot(b))
    }

    fn retract(&self, x: &DenseMatrix, xi: &DenseMatrix) -> Result<DenseMatrix> {
        Ok(x.add(xi))
    }

    fn transport(&self, _from: &DenseMatrix, _to: &DenseMatrix, xi: &DenseMatrix) -> DenseMatrix {
        xi.clone()
    }

    fn feasibility_error(&self, _x: &DenseMatrix) -> f64 {
        0.0
    }

    fn restore(&self, x: DenseMatrix) -> Result<(DenseMatrix, bool)> {
        Ok((x, false))
    }
}

/// `F(x) = x - target` on a flat space.
pub(crate) struct ShiftField {
    pub space: Euclidean,
    pub target: DenseMatrix,
}

impl VectorField for ShiftField {
    type Manifold = Euclidean;

    fn manifold(&self) -> &Euclidean {
        &self.space
    }

    fn eval(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        Ok(x.sub(&self.target))
    }
}
