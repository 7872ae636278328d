//! Random test problems.
//!
//! - Oja: `A = Q diag(d) Qᵀ` with `d ~ U(0, 1)` and `Q` the Q factor of a
//!   Gaussian matrix; `X₀` the Q factor of a Gaussian `m x p` matrix.
//! - Trace ratio: `A = sym(U(0,1)^{m x m})`, `B = Q diag(50 + 10(2u − 1)) Qᵀ`,
//!   `C = sym(N(0,1)^{m x m})`, `X₀` as above.
//! - SPD start: `X₀ = W diag(0.1 + u) Wᵀ` with `W` from a Gaussian matrix.

use mz_core::field::{LogDetField, OjaField, TraceRatioField};
use mz_core::manifold::{Spd, SpdPoint, SpdRetraction, StiefelPoint};
use mz_core::matlin::qf;
use mz_core::DenseMatrix;

use crate::error::{Error, Result};
use crate::rng::{normal_matrix, uniform_matrix, uniform_vec, Stream};

/// Q factor of a fresh Gaussian matrix, redrawn once if it comes out rank
/// deficient.
fn gaussian_q(rng: &mut Stream, rows: usize, cols: usize) -> Result<DenseMatrix> {
    match qf(&normal_matrix(rng, rows, cols)) {
        Ok(f) => Ok(f.q),
        Err(mz_core::Error::RankDeficient { .. }) => Ok(qf(&normal_matrix(rng, rows, cols))?.q),
        Err(e) => Err(e.into()),
    }
}

fn conjugate(q: &DenseMatrix, diag: &[f64]) -> DenseMatrix {
    let mut s = q.scale_columns(diag).matmul_t(q);
    s.symmetrize();
    s
}

fn stiefel_start(rng: &mut Stream, m: usize, p: usize) -> Result<StiefelPoint> {
    Ok(StiefelPoint::new(gaussian_q(rng, m, p)?)?)
}

/// `(A, X₀)` for Oja's field.
pub fn gen_oja(m: usize, p: usize, rng: &mut Stream) -> Result<(DenseMatrix, StiefelPoint)> {
    if p == 0 || m <= p {
        return Err(mz_core::Error::InvalidDimensions("Oja problems need m > p >= 1").into());
    }
    let d = uniform_vec(rng, m);
    let q = gaussian_q(rng, m, m)?;
    let a = conjugate(&q, &d);
    Ok((a, stiefel_start(rng, m, p)?))
}

/// `(A, B, C, X₀)` for the trace-ratio field.
pub fn gen_trace_ratio(
    m: usize,
    p: usize,
    rng: &mut Stream,
) -> Result<(DenseMatrix, DenseMatrix, DenseMatrix, StiefelPoint)> {
    if p == 0 || m <= 2 * p {
        return Err(Error::ConstraintViolated { m, p });
    }
    let mut a = uniform_matrix(rng, m, m);
    a.symmetrize();
    let q = gaussian_q(rng, m, m)?;
    let spectrum: Vec<f64> = uniform_vec(rng, m)
        .into_iter()
        .map(|u| 50.0 + 10.0 * (2.0 * u - 1.0))
        .collect();
    let b = conjugate(&q, &spectrum);
    let mut c = normal_matrix(rng, m, m);
    c.symmetrize();
    Ok((a, b, c, stiefel_start(rng, m, p)?))
}

/// Starting point for the log-det field.
pub fn gen_spd_start(m: usize, rng: &mut Stream) -> Result<SpdPoint> {
    if m == 0 {
        return Err(mz_core::Error::InvalidDimensions("SPD problems need m >= 1").into());
    }
    let g: Vec<f64> = uniform_vec(rng, m).into_iter().map(|u| 0.1 + u).collect();
    let w = gaussian_q(rng, m, m)?;
    Ok(SpdPoint::new(conjugate(&w, &g))?)
}

/// Which test field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FieldKind {
    Oja,
    TraceRatio,
    LogdetSpd,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Oja => "oja",
            FieldKind::TraceRatio => "trace-ratio",
            FieldKind::LogdetSpd => "logdet-spd",
        }
    }
}

/// A generated problem together with its starting point.
#[derive(Clone, Debug)]
pub enum Problem {
    Oja(OjaField, StiefelPoint),
    TraceRatio(TraceRatioField, StiefelPoint),
    LogDet(LogDetField, SpdPoint),
}

impl Problem {
    /// Draws a problem of the given kind. `p` is ignored for the SPD field.
    pub fn generate(
        kind: FieldKind,
        m: usize,
        p: usize,
        rng: &mut Stream,
        spd_retraction: SpdRetraction,
    ) -> Result<Problem> {
        Ok(match kind {
            FieldKind::Oja => {
                let (a, x0) = gen_oja(m, p, rng)?;
                Problem::Oja(OjaField::new(a, p)?, x0)
            }
            FieldKind::TraceRatio => {
                let (a, b, c, x0) = gen_trace_ratio(m, p, rng)?;
                Problem::TraceRatio(TraceRatioField::new(a, b, c, p)?, x0)
            }
            FieldKind::LogdetSpd => {
                let x0 = gen_spd_start(m, rng)?;
                let space = Spd::with_retraction(m, spd_retraction)?;
                Problem::LogDet(LogDetField::new(space), x0)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_stream;
    use mz_core::matlin::Cholesky;

    #[test]
    fn oja_spectrum_lies_in_unit_interval() {
        let (a, x0) = gen_oja(30, 4, &mut trial_stream(3, 0)).unwrap();
        assert_eq!(a.asymmetry(), 0.0);
        assert!(Cholesky::new(&a).is_ok());
        assert!(Cholesky::new(&DenseMatrix::identity(30).sub(&a)).is_ok());
        assert!(x0.orthonormality_error() <= 1e-12);
    }

    #[test]
    fn generators_are_deterministic() {
        let a = gen_oja(12, 3, &mut trial_stream(5, 2)).unwrap();
        let b = gen_oja(12, 3, &mut trial_stream(5, 2)).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);

        let s = gen_trace_ratio(12, 3, &mut trial_stream(5, 2)).unwrap();
        let t = gen_trace_ratio(12, 3, &mut trial_stream(5, 2)).unwrap();
        assert_eq!((s.0, s.1, s.2, s.3), (t.0, t.1, t.2, t.3));
    }

    #[test]
    fn oja_trace_mean_is_one_half() {
        let mean = (0..50)
            .map(|s| gen_oja(200, 1, &mut trial_stream(s, 0)).unwrap().0.trace() / 200.0)
            .sum::<f64>()
            / 50.0;
        assert!((0.4..=0.6).contains(&mean), "{mean}");
    }

    #[test]
    fn trace_ratio_matrices() {
        let (a, b, c, _) = gen_trace_ratio(20, 3, &mut trial_stream(1, 0)).unwrap();
        assert_eq!((a.asymmetry(), b.asymmetry(), c.asymmetry()), (0.0, 0.0, 0.0));
        let shifted = |s: f64| {
            let mut m = b.clone();
            for i in 0..20 {
                m[(i, i)] -= s;
            }
            m
        };
        // eigenvalues of B in [40, 60]
        assert!(Cholesky::new(&shifted(40.0 - 1e-9)).is_ok());
        assert!(Cholesky::new(&shifted(60.0 + 1e-9).scale(-1.0)).is_ok());

        assert!(matches!(
            gen_trace_ratio(6, 3, &mut trial_stream(1, 0)),
            Err(Error::ConstraintViolated { m: 6, p: 3 })
        ));
    }

    #[test]
    fn spd_start_is_spd_with_small_determinant() {
        let below = (0..100)
            .filter(|&s| gen_spd_start(100, &mut trial_stream(s, 0)).unwrap().ln_det() < 0.0)
            .count();
        assert_eq!(below, 100);
    }
}
