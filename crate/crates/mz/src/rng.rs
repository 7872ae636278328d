//! Seeded random streams.
//!
//! Every trial draws from its own ChaCha8 stream seeded with
//! `base_seed + trial` (wrapping), so trials are independent of each other
//! and of the order they run in. Normal variates come from `rand_distr`'s
//! ziggurat sampler; uniforms are `[0, 1)` doubles.

use mz_core::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Stream = ChaCha8Rng;

pub fn trial_stream(base_seed: u64, trial: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(trial))
}

/// Standard normal entries, filled row by row.
pub fn normal_matrix(rng: &mut Stream, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Uniform `[0, 1)` entries, filled row by row.
pub fn uniform_matrix(rng: &mut Stream, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>())
}

pub fn uniform_vec(rng: &mut Stream, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}
