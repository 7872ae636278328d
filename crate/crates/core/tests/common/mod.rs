#![allow(dead_code)]

use mz_core::matlin::qf;
use mz_core::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    qf(&gaussian(rng, rows, cols)).unwrap().q
}

/// `W diag(d) Wᵀ` with `d ~ lo + U(0, 1)`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, lo: f64) -> DenseMatrix {
    let w = orthonormal(rng, n, n);
    let d: Vec<f64> = (0..n).map(|_| lo + rng.random::<f64>()).collect();
    let mut x = w.scale_columns(&d).matmul_t(&w);
    x.symmetrize();
    x
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let mut s = gaussian(rng, n, n);
    s.symmetrize();
    s
}
