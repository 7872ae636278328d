//! Derivative-free Polak–Ribière–Polyak iteration with a two-sided
//! non-monotone line search.
//!
//! Each iteration builds a conjugate direction from field values only
//! (no Jacobian), picks an initial step from a transported difference
//! quotient, and backtracks on `α ρʲ` until either `+α` or `−α` satisfies
//!
//! ```text
//! f(R_X(±αΔX)) ≤ Γ_k + δ_k − t₁α²‖ΔX‖² − t₂α² f(X_k)
//! ```
//!
//! where `Γ_k` is a weighted average of past merits and `δ_k` is a summable
//! forgiveness sequence.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{transported_difference, FieldValue, PointOf, VectorField};
use crate::manifold::{Manifold, INVARIANT_TOL};
use crate::matlin::{abs, ln, sqrt, DenseMatrix};
use crate::timer::Timer;

/// Solver parameters. Defaults are the values used for the reported
/// experiments.
#[derive(Clone, Debug, PartialEq)]
pub struct PrpConfig {
    /// Backtracking factor `ρ ∈ (0, 1)`.
    pub rho: f64,
    /// Weight of `α²‖ΔX‖²` in the sufficient-decrease test.
    pub t1: f64,
    /// Weight of `α² f(X_k)` in the sufficient-decrease test.
    pub t2: f64,
    /// Averaging weight `λ ∈ (0, 1)` for `Γ`/`Φ`.
    pub lambda: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Probe step `ε` of the initial step heuristic.
    pub eps_fd: f64,
    /// Absolute stopping tolerance `e_a`.
    pub e_a: f64,
    /// Relative stopping tolerance `e_r`.
    pub e_r: f64,
    pub max_iter: usize,
    /// Number of `α ρʲ` levels tried before the line search gives up.
    pub max_backtracks: usize,
    /// Turn a violated non-monotone invariant into an error instead of a
    /// counter in the report.
    pub strict: bool,
}

impl Default for PrpConfig {
    fn default() -> Self {
        PrpConfig {
            rho: 0.5,
            t1: 1e-10,
            t2: 1e-10,
            lambda: 0.6,
            alpha_min: 1e-10,
            alpha_max: 1e10,
            eps_fd: 1e-8,
            e_a: 1e-6,
            e_r: 1e-5,
            max_iter: 20000,
            max_backtracks: 60,
            strict: false,
        }
    }
}

impl PrpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidConfig("rho must lie in (0, 1)"));
        }
        if !(self.t1 > 0.0 && self.t2 > 0.0) {
            return Err(Error::InvalidConfig("t1 and t2 must be positive"));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidConfig("lambda must lie in (0, 1)"));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= self.alpha_max) {
            return Err(Error::InvalidConfig("need 0 < alpha_min <= alpha_max"));
        }
        if !(self.eps_fd > 0.0) {
            return Err(Error::InvalidConfig("eps_fd must be positive"));
        }
        if !(self.e_a >= 0.0 && self.e_r >= 0.0) {
            return Err(Error::InvalidConfig("stopping tolerances must be non-negative"));
        }
        if self.max_backtracks == 0 {
            return Err(Error::InvalidConfig("max_backtracks must be at least 1"));
        }
        Ok(())
    }
}

/// When the outer loop stops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    /// `‖F(X_k)‖/√M ≤ e_a + e_r‖F(X_0)‖/√M`.
    Relative { e_a: f64, e_r: f64 },
    /// `‖F(X_k)‖ < ζ`.
    Below(f64),
}

impl StopRule {
    pub fn satisfied(&self, res: f64, res0: f64, dim: usize) -> bool {
        match *self {
            StopRule::Relative { e_a, e_r } => check_stop(res, res0, dim, e_a, e_r),
            StopRule::Below(zeta) => res < zeta,
        }
    }
}

/// `√M e_a + e_r ‖F(X_0)‖`.
pub fn stop_threshold(res0: f64, dim: usize, e_a: f64, e_r: f64) -> f64 {
    sqrt(dim as f64) * e_a + e_r * res0
}

/// Relative/absolute stopping test on the residual.
pub fn check_stop(res: f64, res0: f64, dim: usize, e_a: f64, e_r: f64) -> bool {
    res <= stop_threshold(res0, dim.max(1), e_a, e_r)
}

/// `δ_k = ‖F(X_0)‖ / ((2+k) ln²(2+k))`.
pub fn delta_schedule(k: usize, f0_norm: f64) -> f64 {
    let t = 2.0 + k as f64;
    let l = ln(t);
    f0_norm / (t * l * l)
}

/// `β_k = ⟨F_k, F_k − 𝒯F_{k−1}⟩ / ‖F_{k−1}‖²`, inner product taken at `x`.
pub fn compute_beta<M: Manifold>(
    manifold: &M,
    x: &M::Point,
    f_k: &DenseMatrix,
    f_prev_transported: &DenseMatrix,
    f_prev_norm: f64,
) -> Result<f64> {
    if !(f_prev_norm > 1e-300) {
        return Err(Error::DivideByZero { value: f_prev_norm });
    }
    let y = f_k.sub(f_prev_transported);
    Ok(manifold.inner(x, f_k, &y)? / (f_prev_norm * f_prev_norm))
}

/// `−F_k + β 𝒯ΔX_{k−1}`, or `−F_k` on the first iteration.
pub fn compute_direction(
    f_k: &DenseMatrix,
    beta: f64,
    transported_prev_dir: Option<&DenseMatrix>,
) -> DenseMatrix {
    let mut d = f_k.scale(-1.0);
    if let Some(prev) = transported_prev_dir {
        d.axpy(beta, prev);
    }
    d
}

/// Clamps `σ` to `[α_min, α_max]`.
pub fn clamp_step(sigma: f64, alpha_min: f64, alpha_max: f64) -> f64 {
    if sigma > alpha_max {
        alpha_max
    } else if sigma < alpha_min {
        alpha_min
    } else {
        sigma
    }
}

/// `(Φ_{k+1}, Γ_{k+1})` from `Φ_{k+1} = λΦ_k + 1` and
/// `Γ_{k+1} = (λΦ_k(Γ_k + δ_k) + f(X_{k+1})) / Φ_{k+1}`.
pub fn gamma_update(gamma: f64, phi: f64, lambda: f64, delta: f64, f_next: f64) -> (f64, f64) {
    let weight = lambda * phi;
    let phi_next = weight + 1.0;
    let gamma_next = (weight * (gamma + delta) + f_next) / phi_next;
    (gamma_next, phi_next)
}

/// Result of the initial step heuristic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialStep {
    pub alpha: f64,
    /// `None` when the denominator vanished and `α = 1` was used.
    pub sigma: Option<f64>,
}

/// `σ = |⟨F_k, ΔX⟩ / ⟨Z_k, 𝒯_{εΔX}ΔX⟩|` with
/// `Z_k = (F(R(εΔX)) − 𝒯_{εΔX}F_k)/ε`, clamped to `[α_min, α_max]`.
/// Costs one field evaluation.
pub fn initial_step<F: VectorField>(
    field: &F,
    x: &PointOf<F>,
    value: &FieldValue,
    direction: &DenseMatrix,
    cfg: &PrpConfig,
) -> Result<InitialStep> {
    let m = field.manifold();
    let (z, y) = transported_difference(field, x, &value.tangent, direction, cfg.eps_fd)?;
    let moved_dir = m.transport(x, &y, direction);
    let numerator = m.inner(x, &value.tangent, direction)?;
    let denominator = m.inner(&y, &z, &moved_dir)?;
    if !(abs(denominator) > 1e-300) {
        return Ok(InitialStep {
            alpha: 1.0,
            sigma: None,
        });
    }
    let sigma = abs(numerator / denominator);
    if !sigma.is_finite() {
        return Ok(InitialStep {
            alpha: 1.0,
            sigma: None,
        });
    }
    Ok(InitialStep {
        alpha: clamp_step(sigma, cfg.alpha_min, cfg.alpha_max),
        sigma: Some(sigma),
    })
}

/// Reference values the line search compares against.
#[derive(Clone, Copy, Debug)]
pub struct LineSearchInput<'a> {
    /// `f(X_k)`.
    pub merit: f64,
    pub gamma: f64,
    pub delta: f64,
    pub direction: &'a DenseMatrix,
    pub alpha0: f64,
}

/// An accepted trial point.
#[derive(Clone, Debug)]
pub struct AcceptedStep<P> {
    /// `ΔZ_k = ±α_k ΔX_k`.
    pub step: DenseMatrix,
    pub point: P,
    pub value: FieldValue,
    pub alpha: f64,
    pub sign: i8,
    pub backtracks: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug)]
pub enum LineSearchOutcome<P> {
    Accepted(AcceptedStep<P>),
    Failed { evaluations: usize },
}

/// Backtracks `α = α0 ρʲ`, trying `+α` before `−α` at each level.
pub fn line_search<F: VectorField>(
    field: &F,
    x: &PointOf<F>,
    input: LineSearchInput<'_>,
    cfg: &PrpConfig,
) -> Result<LineSearchOutcome<PointOf<F>>> {
    let m = field.manifold();
    let dir_norm = m.norm(x, input.direction)?;
    let mut evaluations = 0;
    if !(dir_norm > 0.0) || !(input.alpha0 > 0.0) {
        return Ok(LineSearchOutcome::Failed { evaluations });
    }
    let dir_sq = dir_norm * dir_norm;
    let mut alpha = input.alpha0;
    for j in 0..cfg.max_backtracks {
        let a2 = alpha * alpha;
        let bound = input.gamma + input.delta - cfg.t1 * a2 * dir_sq - cfg.t2 * a2 * input.merit;
        for sign in [1i8, -1] {
            let step = input.direction.scale(f64::from(sign) * alpha);
            // A trial the retraction cannot represent is treated as rejected.
            let Ok(point) = m.retract(x, &step) else {
                continue;
            };
            let value = field.value(&point)?;
            evaluations += 1;
            if value.merit() <= bound {
                return Ok(LineSearchOutcome::Accepted(AcceptedStep {
                    step,
                    point,
                    value,
                    alpha,
                    sign,
                    backtracks: j,
                    evaluations,
                }));
            }
        }
        alpha *= cfg.rho;
    }
    Ok(LineSearchOutcome::Failed { evaluations })
}

/// Data carried from the previous iteration.
#[derive(Clone, Debug)]
pub struct PreviousStep<P> {
    pub x: P,
    pub value: FieldValue,
    /// `ΔX_{k−1}`.
    pub direction: DenseMatrix,
    /// `ΔZ_{k−1}`.
    pub step: DenseMatrix,
}

/// Full iteration state.
#[derive(Clone, Debug)]
pub struct PrpState<P> {
    pub k: usize,
    pub x: P,
    pub value: FieldValue,
    pub previous: Option<PreviousStep<P>>,
    pub gamma: f64,
    pub phi: f64,
    pub f0_norm: f64,
    pub f0_merit: f64,
    /// `Σ_{j<k} δ_j`.
    pub delta_sum: f64,
    pub nf: usize,
}

impl<P: Clone> PrpState<P> {
    /// Evaluates `F(X_0)` and sets `Γ_0 = f(X_0)`, `Φ_0 = 1`.
    pub fn new<F: VectorField<Manifold = M>, M: Manifold<Point = P>>(field: &F, x0: P) -> Result<Self> {
        let value = field.value(&x0)?;
        let merit = value.merit();
        Ok(PrpState {
            k: 0,
            f0_norm: value.norm,
            f0_merit: merit,
            gamma: merit,
            phi: 1.0,
            x: x0,
            value,
            previous: None,
            delta_sum: 0.0,
            nf: 1,
        })
    }

    /// The conjugate search direction `ΔX_k`.
    pub fn direction<F: VectorField<Manifold = M>, M: Manifold<Point = P>>(
        &self,
        field: &F,
    ) -> Result<DenseMatrix> {
        let Some(prev) = &self.previous else {
            return Ok(compute_direction(&self.value.tangent, 0.0, None));
        };
        let m = field.manifold();
        let moved_f = m.transport(&prev.x, &self.x, &prev.value.tangent);
        let beta = compute_beta(m, &self.x, &self.value.tangent, &moved_f, prev.value.norm)?;
        let moved_dir = m.transport(&prev.x, &self.x, &prev.direction);
        Ok(compute_direction(&self.value.tangent, beta, Some(&moved_dir)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    LineSearchFailed,
}

/// One row of the residual history. Row 0 describes the starting point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub residual: f64,
    pub alpha: f64,
    /// `+1`/`−1` for the accepted side, `0` on row 0.
    pub sign: i8,
    pub backtracks: usize,
    /// `α_{k−1}‖ΔX_{k−1}‖`.
    pub step_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iters: usize,
    pub nf: usize,
    pub res0: f64,
    pub res_final: f64,
    pub history: Vec<IterationRecord>,
    pub wall_time: f64,
    /// Iterates that had to be re-projected onto the manifold.
    pub reprojections: usize,
    /// Largest point-invariant violation seen over all iterates.
    pub max_feasibility_error: f64,
    /// Non-monotone invariants (`f ≤ Γ`, `Γ_{k+1} ≤ Γ_k + δ_k`, level set)
    /// that failed.
    pub invariant_violations: usize,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Final iterate with its field value and statistics.
#[derive(Clone, Debug)]
pub struct Solved<P> {
    pub point: P,
    pub value: FieldValue,
    pub report: SolveReport,
}

/// Runs the PRP iteration from `x0` with the relative/absolute stopping rule.
pub fn prp_solve<F: VectorField>(
    field: &F,
    x0: PointOf<F>,
    cfg: &PrpConfig,
) -> Result<Solved<PointOf<F>>> {
    prp_solve_with_stop(
        field,
        x0,
        cfg,
        StopRule::Relative {
            e_a: cfg.e_a,
            e_r: cfg.e_r,
        },
    )
}

fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + 1e-12 * abs(rhs).max(abs(lhs)).max(1e-300)
}

/// Runs the PRP iteration with an explicit stopping rule.
pub fn prp_solve_with_stop<F: VectorField>(
    field: &F,
    x0: PointOf<F>,
    cfg: &PrpConfig,
    stop: StopRule,
) -> Result<Solved<PointOf<F>>> {
    cfg.validate()?;
    let timer = Timer::start();
    let m = field.manifold();
    let dim = m.dim();
    let violation = m.feasibility_error(&x0);
    if !(violation <= INVARIANT_TOL) {
        return Err(Error::InvalidPoint { violation });
    }

    let mut state = PrpState::new(field, x0)?;
    let res0 = state.f0_norm;
    let mut history = Vec::new();
    history.push(IterationRecord {
        k: 0,
        residual: res0,
        alpha: 0.0,
        sign: 0,
        backtracks: 0,
        step_norm: 0.0,
    });
    let mut reprojections = 0;
    let mut invariant_violations = 0;
    let mut max_feasibility_error = violation;

    let status = loop {
        if stop.satisfied(state.value.norm, res0, dim) {
            break SolveStatus::Converged;
        }
        if state.k >= cfg.max_iter {
            break SolveStatus::MaxIter;
        }
        let direction = state.direction(field)?;
        let dir_norm = m.norm(&state.x, &direction)?;
        if !(dir_norm > 0.0) {
            break SolveStatus::LineSearchFailed;
        }
        let start = initial_step(field, &state.x, &state.value, &direction, cfg)?;
        state.nf += 1;

        let delta = delta_schedule(state.k, state.f0_norm);
        let input = LineSearchInput {
            merit: state.value.merit(),
            gamma: state.gamma,
            delta,
            direction: &direction,
            alpha0: start.alpha,
        };
        let accepted = match line_search(field, &state.x, input, cfg)? {
            LineSearchOutcome::Accepted(a) => {
                state.nf += a.evaluations;
                a
            }
            LineSearchOutcome::Failed { evaluations } => {
                state.nf += evaluations;
                break SolveStatus::LineSearchFailed;
            }
        };

        let (point, reprojected) = m.restore(accepted.point)?;
        let value = if reprojected {
            reprojections += 1;
            state.nf += 1;
            field.value(&point)?
        } else {
            accepted.value
        };
        max_feasibility_error = max_feasibility_error.max(m.feasibility_error(&point));

        let f_next = value.merit();
        let (gamma_next, phi_next) = gamma_update(state.gamma, state.phi, cfg.lambda, delta, f_next);
        state.delta_sum += delta;
        let checks = [
            (within(f_next, gamma_next), "f(X_k+1) <= Gamma_k+1"),
            (within(gamma_next, state.gamma + delta), "Gamma_k+1 <= Gamma_k + delta_k"),
            (
                within(f_next, state.f0_merit + state.delta_sum),
                "f(X_k+1) <= f(X_0) + sum delta",
            ),
        ];
        for (ok, what) in checks {
            if !ok {
                if cfg.strict {
                    return Err(Error::InvariantViolated {
                        iteration: state.k + 1,
                        what,
                    });
                }
                invariant_violations += 1;
            }
        }

        history.push(IterationRecord {
            k: state.k + 1,
            residual: value.norm,
            alpha: accepted.alpha,
            sign: accepted.sign,
            backtracks: accepted.backtracks,
            step_norm: accepted.alpha * dir_norm,
        });

        let old_x = core::mem::replace(&mut state.x, point);
        let old_value = core::mem::replace(&mut state.value, value);
        state.previous = Some(PreviousStep {
            x: old_x,
            value: old_value,
            direction,
            step: accepted.step,
        });
        state.gamma = gamma_next;
        state.phi = phi_next;
        state.k += 1;
    };

    let report = SolveReport {
        status,
        iters: state.k,
        nf: state.nf,
        res0,
        res_final: state.value.norm,
        history,
        wall_time: timer.seconds(),
        reprojections,
        max_feasibility_error,
        invariant_violations,
    };
    Ok(Solved {
        point: state.x,
        value: state.value,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::LogDetField;
    use crate::manifold::{Spd, SpdPoint};
    use crate::testing::{Euclidean, ShiftField};

    #[test]
    fn delta_schedule_examples() {
        let d0 = delta_schedule(0, 1.0);
        assert!((d0 - 1.0 / (2.0 * 2f64.ln().powi(2))).abs() < 1e-15);
        assert!((d0 - 1.0407).abs() < 1e-4);
        assert!((1..1000).all(|k| delta_schedule(k + 1, 1.0) < delta_schedule(k, 1.0)));
        let partial: f64 = (0..=1_000_000).map(|k| delta_schedule(k, 1.0)).sum();
        assert!(partial.is_finite() && partial < 6.0, "{partial}");
        assert_eq!(delta_schedule(3, 2.0), 2.0 * delta_schedule(3, 1.0));
    }

    fn flat(n: usize) -> (Euclidean, DenseMatrix) {
        (Euclidean { rows: n, cols: 1 }, DenseMatrix::zeros(n, 1))
    }

    #[test]
    fn beta_examples() {
        let (e, x) = flat(1);
        let two = DenseMatrix::from_rows(&[[2.0]]).unwrap();
        let one = DenseMatrix::from_rows(&[[1.0]]).unwrap();
        assert_eq!(compute_beta(&e, &x, &two, &one, 1.0).unwrap(), 2.0);
        assert_eq!(compute_beta(&e, &x, &two, &two, 1.0).unwrap(), 0.0);

        let (e2, x2) = flat(2);
        let fk = DenseMatrix::from_rows(&[[1.0], [0.0]]).unwrap();
        let prev = DenseMatrix::from_rows(&[[1.0], [-3.0]]).unwrap();
        // Y = (0, 3) ⟂ F_k
        assert_eq!(compute_beta(&e2, &x2, &fk, &prev, 2.0).unwrap(), 0.0);

        assert!(matches!(
            compute_beta(&e, &x, &two, &one, 0.0),
            Err(Error::DivideByZero { .. })
        ));
    }

    #[test]
    fn direction_examples() {
        let f = DenseMatrix::from_rows(&[[1.0], [-2.0]]).unwrap();
        assert_eq!(compute_direction(&f, 0.7, None), f.scale(-1.0));
        let other = DenseMatrix::from_rows(&[[5.0], [5.0]]).unwrap();
        assert_eq!(compute_direction(&f, 0.0, Some(&other)), f.scale(-1.0));
        assert_eq!(compute_direction(&f, 1.0, Some(&f)).max_abs(), 0.0);
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(clamp_step(0.3, 1e-10, 1e10), 0.3);
        assert_eq!(clamp_step(1e12, 1e-10, 1e10), 1e10);
        assert_eq!(clamp_step(1e-12, 1e-10, 1e10), 1e-10);
        // monotone in σ
        let grid = [1e-14, 1e-10, 1e-3, 1.0, 1e10, 1e14];
        assert!(grid.windows(2).all(|w| clamp_step(w[0], 1e-10, 1e10) <= clamp_step(w[1], 1e-10, 1e10)));
    }

    #[test]
    fn gamma_update_examples() {
        let (g, p) = gamma_update(1.0, 1.0, 0.6, 0.0, 0.0);
        assert!((p - 1.6).abs() < 1e-15);
        assert!((g - 0.375).abs() < 1e-15);

        let (g, _) = gamma_update(2.0, 3.0, 0.6, 0.5, 2.5);
        assert!((g - 2.5).abs() < 1e-15);

        for f_next in [0.0, 0.5, 1.0, 2.4] {
            let (g, _) = gamma_update(2.0, 1.7, 0.6, 0.4, f_next);
            assert!(g <= 2.4 + 1e-15 && g >= f_next - 1e-15);
        }
    }

    #[test]
    fn stop_examples() {
        assert!(check_stop(0.0, 1.0, 10, 1e-6, 1e-5));
        let t = stop_threshold(1.5558, 29535, 1e-6, 1e-5);
        assert!((t - 1.874e-4).abs() < 1e-7, "{t}");
        assert!(check_stop(1.8068e-4, 1.5558, 29535, 1e-6, 1e-5));
        assert!(!check_stop(t * (1.0 + 1e-9), 1.5558, 29535, 1e-6, 1e-5));
        assert!(check_stop(t, 1.5558, 29535, 1e-6, 1e-5));
    }

    fn logdet_problem(m: usize, diag: &[f64]) -> (LogDetField, SpdPoint) {
        let field = LogDetField::new(Spd::new(m).unwrap());
        (field, SpdPoint::new(DenseMatrix::from_diag(diag)).unwrap())
    }

    #[test]
    fn line_search_accepts_first_trial() {
        let (field, x) = logdet_problem(1, &[2.0]);
        let v = field.value(&x).unwrap();
        let dir = v.tangent.scale(-1.0);
        let input = LineSearchInput {
            merit: v.merit(),
            gamma: v.merit(),
            delta: 1.0,
            direction: &dir,
            alpha0: 0.1,
        };
        let LineSearchOutcome::Accepted(a) = line_search(&field, &x, input, &PrpConfig::default()).unwrap()
        else {
            panic!("line search failed")
        };
        assert_eq!((a.alpha, a.sign, a.backtracks, a.evaluations), (0.1, 1, 0, 1));
    }

    #[test]
    fn line_search_takes_the_negative_side() {
        // Moving along +F pushes ln det further from zero; −F pulls it back.
        let (field, x) = logdet_problem(1, &[2.0]);
        let v = field.value(&x).unwrap();
        let wrong_way = v.tangent.clone();
        let input = LineSearchInput {
            merit: v.merit(),
            gamma: v.merit(),
            delta: 0.0,
            direction: &wrong_way,
            alpha0: 0.3,
        };
        let LineSearchOutcome::Accepted(a) = line_search(&field, &x, input, &PrpConfig::default()).unwrap()
        else {
            panic!("line search failed")
        };
        assert_eq!((a.sign, a.backtracks, a.evaluations), (-1, 0, 2));
        assert!(a.value.merit() < v.merit());
    }

    #[test]
    fn line_search_fails_when_decrease_is_impossible() {
        let (field, x) = logdet_problem(2, &[2.0, 0.7]);
        let v = field.value(&x).unwrap();
        let dir = v.tangent.scale(-1.0);
        let cfg = PrpConfig {
            t1: 1e30,
            t2: 1e30,
            ..PrpConfig::default()
        };
        let input = LineSearchInput {
            merit: v.merit(),
            gamma: v.merit(),
            delta: 0.0,
            direction: &dir,
            alpha0: 1.0,
        };
        let out = line_search(&field, &x, input, &cfg).unwrap();
        assert!(matches!(out, LineSearchOutcome::Failed { evaluations: 120 }));

        let zero = DenseMatrix::zeros(2, 2);
        let out = line_search(&field, &x, LineSearchInput { direction: &zero, ..input }, &cfg).unwrap();
        assert!(matches!(out, LineSearchOutcome::Failed { evaluations: 0 }));
    }

    #[test]
    fn solve_at_a_zero_stops_immediately() {
        let (field, x) = logdet_problem(3, &[1.0, 1.0, 1.0]);
        let s = prp_solve(&field, x, &PrpConfig::default()).unwrap();
        assert_eq!(s.report.status, SolveStatus::Converged);
        assert_eq!((s.report.iters, s.report.nf, s.report.history.len()), (0, 1, 1));
    }

    #[test]
    fn solves_a_flat_linear_field() {
        let target = DenseMatrix::from_rows(&[[1.0], [-2.0], [0.5]]).unwrap();
        let field = ShiftField {
            space: Euclidean { rows: 3, cols: 1 },
            target: target.clone(),
        };
        let cfg = PrpConfig {
            e_a: 1e-12,
            e_r: 0.0,
            ..PrpConfig::default()
        };
        let s = prp_solve(&field, DenseMatrix::zeros(3, 1), &cfg).unwrap();
        assert!(s.report.converged());
        assert!(s.point.sub(&target).norm_fro() < 1e-10);
        assert_eq!(s.report.invariant_violations, 0);
    }

    #[test]
    fn nf_bookkeeping_matches_history() {
        let (field, x) = logdet_problem(3, &[3.0, 0.2, 0.9]);
        let s = prp_solve(&field, x, &PrpConfig::default()).unwrap();
        let r = &s.report;
        assert!(r.converged());
        assert_eq!(r.history.len(), r.iters + 1);
        // 1 initial + per iteration: 1 probe + trials (+ → 1, − → 2 per level)
        let trials: usize = r.history[1..]
            .iter()
            .map(|h| 2 * h.backtracks + if h.sign > 0 { 1 } else { 2 })
            .sum();
        assert_eq!(r.nf, 1 + r.iters + trials);
    }

    #[test]
    fn invalid_configuration_is_rejected() {
        let (field, x) = logdet_problem(1, &[2.0]);
        for cfg in [
            PrpConfig { rho: 1.0, ..PrpConfig::default() },
            PrpConfig { lambda: 0.0, ..PrpConfig::default() },
            PrpConfig { alpha_min: 2.0, alpha_max: 1.0, ..PrpConfig::default() },
            PrpConfig { t1: 0.0, ..PrpConfig::default() },
        ] {
            assert!(matches!(prp_solve(&field, x.clone(), &cfg), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn max_iter_is_reported() {
        let (field, x) = logdet_problem(2, &[5.0, 0.1]);
        let cfg = PrpConfig {
            max_iter: 1,
            e_a: 0.0,
            e_r: 0.0,
            ..PrpConfig::default()
        };
        let s = prp_solve(&field, x, &cfg).unwrap();
        assert_eq!(s.report.status, SolveStatus::MaxIter);
        assert_eq!(s.report.iters, 1);
    }
}
