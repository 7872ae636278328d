//! Hybrid solver: PRP until the residual drops below `ζ₁`, then inexact
//! Riemannian Newton steps on the Grassmann horizontal space until it drops
//! below `ζ₂`.
//!
//! The Newton equation `J[Δ] = −F(X)` is solved by conjugate gradients in the
//! horizontal inner product, truncated at relative residual
//! `min(ς, ‖F(X)‖)`. There is no globalization in the Newton phase.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{FieldValue, HorizontalJacobian, HorizontalOperator};
use crate::manifold::{Manifold, StiefelPoint};
use crate::matlin::{abs, sqrt, DenseMatrix};
use crate::prp::{prp_solve_with_stop, PrpConfig, SolveReport, SolveStatus, StopRule};
use crate::timer::Timer;

/// Why the inner CG loop stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgExit {
    Converged,
    CapReached,
    /// `|⟨d, Jd⟩|` fell below `1e-14‖d‖²`.
    Breakdown,
}

#[derive(Clone, Debug)]
pub struct CgOutcome {
    /// Iterate with the smallest residual seen.
    pub delta: DenseMatrix,
    /// Operator applications.
    pub ncg: usize,
    pub exit: CgExit,
    /// `‖rhs − JΔ‖/‖rhs‖` from the CG recurrence.
    pub rel_residual: f64,
}

/// Conjugate gradients for `J[Δ] = rhs` from `Δ = 0`, stopping when
/// `‖J[Δ] − rhs‖ ≤ rel_tol‖rhs‖` or after `cap` applications of `J`.
///
/// The operator only has to be self-adjoint and definite on the Krylov
/// space; negative definite operators are handled as well as positive ones.
pub fn truncated_cg<J>(mut apply: J, rhs: &DenseMatrix, rel_tol: f64, cap: usize) -> CgOutcome
where
    J: FnMut(&DenseMatrix) -> DenseMatrix,
{
    let (rows, cols) = rhs.shape();
    let rhs_norm = rhs.norm_fro();
    let mut delta = DenseMatrix::zeros(rows, cols);
    if rhs_norm == 0.0 {
        return CgOutcome {
            delta,
            ncg: 0,
            exit: CgExit::Converged,
            rel_residual: 0.0,
        };
    }
    let target = rel_tol * rhs_norm;
    let mut r = rhs.clone();
    let mut d = r.clone();
    let mut rr = r.dot(&r);
    let mut best = delta.clone();
    let mut best_rr = rr;
    let mut ncg = 0;

    let exit = loop {
        if sqrt(rr) <= target {
            break CgExit::Converged;
        }
        if ncg >= cap {
            break CgExit::CapReached;
        }
        let jd = apply(&d);
        ncg += 1;
        let curvature = d.dot(&jd);
        if !(abs(curvature) > 1e-14 * d.dot(&d)) {
            break CgExit::Breakdown;
        }
        let a = rr / curvature;
        delta.axpy(a, &d);
        r.axpy(-a, &jd);
        let rr_next = r.dot(&r);
        if rr_next < best_rr {
            best.clone_from(&delta);
            best_rr = rr_next;
        }
        d = r.add(&d.scale(rr_next / rr));
        rr = rr_next;
    };

    CgOutcome {
        delta: best,
        ncg,
        exit,
        rel_residual: sqrt(best_rr) / rhs_norm,
    }
}

/// `min(ς, ‖F(X)‖)`.
pub fn forcing_tol(res: f64, varsigma: f64) -> f64 {
    varsigma.min(res)
}

/// Default CG cap `min(p(m−p), 2000)`.
pub fn default_cg_max(m: usize, p: usize) -> usize {
    (p * (m - p)).min(2000)
}

/// One inexact Newton step.
#[derive(Clone, Debug)]
pub struct NewtonStep {
    pub point: StiefelPoint,
    pub delta: DenseMatrix,
    pub ncg: usize,
    pub exit: CgExit,
    /// `‖J[Δ] + F‖/‖F‖`, recomputed with one extra operator application.
    pub linear_residual: f64,
    /// CG produced nothing usable and `Δ = −F` was taken instead.
    pub fallback: bool,
}

/// Solves `J[Δ] = −F(X)` to relative accuracy `min(ς, ‖F‖)` and retracts.
pub fn newton_step<F: HorizontalJacobian>(
    field: &F,
    x: &StiefelPoint,
    value: &FieldValue,
    varsigma: f64,
    cg_max: usize,
) -> Result<NewtonStep> {
    let jac = field.jacobian(x)?;
    let rhs = value.tangent.scale(-1.0);
    let tol = forcing_tol(value.norm, varsigma);
    let cg = truncated_cg(|d| jac.apply(d), &rhs, tol, cg_max);

    let fallback = cg.delta.max_abs() == 0.0 && rhs.max_abs() > 0.0;
    let delta = if fallback { rhs.clone() } else { cg.delta };
    let linear_residual = if value.norm > 0.0 {
        jac.apply(&delta).sub(&rhs).norm_fro() / value.norm
    } else {
        0.0
    };
    let point = field.manifold().retract(x, &delta)?;
    Ok(NewtonStep {
        point,
        delta,
        ncg: cg.ncg,
        exit: cg.exit,
        linear_residual,
        fallback,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HybridConfig {
    /// PRP phase stops once `‖F‖ < ζ₁`.
    pub zeta1: f64,
    /// Newton phase stops once `‖F‖ < ζ₂`.
    pub zeta2: f64,
    /// Forcing-term cap `ς`.
    pub varsigma: f64,
    /// CG cap per Newton step; `None` means `min(p(m−p), 2000)`.
    pub cg_max: Option<usize>,
    pub newton_max: usize,
    pub prp: PrpConfig,
}

impl Default for HybridConfig {
    fn default() -> Self {
        HybridConfig {
            zeta1: 1e-3,
            zeta2: 1e-7,
            varsigma: 1e-8,
            cg_max: None,
            newton_max: 50,
            prp: PrpConfig::default(),
        }
    }
}

impl HybridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.zeta2 > 0.0 && self.zeta2 < self.zeta1) {
            return Err(Error::InvalidConfig("need 0 < zeta2 < zeta1"));
        }
        if !(self.varsigma > 0.0 && self.varsigma < 1.0) {
            return Err(Error::InvalidConfig("varsigma must lie in (0, 1)"));
        }
        if self.cg_max == Some(0) {
            return Err(Error::InvalidConfig("cg_max must be at least 1"));
        }
        self.prp.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HybridStatus {
    Converged,
    /// The PRP phase ended without reaching `ζ₁`.
    PrpFailed(SolveStatus),
    /// CG degraded and the residual went up.
    NewtonStalled,
    /// `newton_max` steps without reaching `ζ₂`.
    MaxIter,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonRecord {
    pub k: usize,
    pub residual: f64,
    pub ncg: usize,
    pub exit: CgExit,
    pub linear_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonPhaseReport {
    pub iters: usize,
    pub nf: usize,
    pub ncg: usize,
    pub cg_max: usize,
    pub res_start: f64,
    pub res_final: f64,
    /// Row 0 is the point handed over by the PRP phase.
    pub history: Vec<NewtonRecord>,
    pub wall_time: f64,
    /// Accepted steps that did not reduce the residual.
    pub nonmonotone_steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HybridReport {
    pub status: HybridStatus,
    pub prp: SolveReport,
    pub newton: NewtonPhaseReport,
    pub wall_time: f64,
}

impl HybridReport {
    pub fn converged(&self) -> bool {
        self.status == HybridStatus::Converged
    }
}

#[derive(Clone, Debug)]
pub struct HybridSolved {
    pub point: StiefelPoint,
    pub value: FieldValue,
    pub report: HybridReport,
}

/// PRP with stop rule `‖F‖ < ζ₁`, then Newton until `‖F‖ < ζ₂`.
pub fn hybrid_solve<F: HorizontalJacobian>(
    field: &F,
    x0: StiefelPoint,
    cfg: &HybridConfig,
) -> Result<HybridSolved> {
    cfg.validate()?;
    let timer = Timer::start();
    let manifold = field.manifold();
    let cg_max = cfg
        .cg_max
        .unwrap_or_else(|| default_cg_max(manifold.m(), manifold.p()));

    let phase1 = prp_solve_with_stop(field, x0, &cfg.prp, StopRule::Below(cfg.zeta1))?;
    let newton_timer = Timer::start();
    let mut x = phase1.point;
    let mut value = phase1.value;
    let res_start = value.norm;
    let mut newton = NewtonPhaseReport {
        iters: 0,
        nf: 0,
        ncg: 0,
        cg_max,
        res_start,
        res_final: res_start,
        history: Vec::new(),
        wall_time: 0.0,
        nonmonotone_steps: 0,
    };
    newton.history.push(NewtonRecord {
        k: 0,
        residual: res_start,
        ncg: 0,
        exit: CgExit::Converged,
        linear_residual: 0.0,
    });

    let status = if !phase1.report.converged() {
        HybridStatus::PrpFailed(phase1.report.status)
    } else {
        loop {
            if value.norm < cfg.zeta2 {
                break HybridStatus::Converged;
            }
            if newton.iters >= cfg.newton_max {
                break HybridStatus::MaxIter;
            }
            let step = newton_step(field, &x, &value, cfg.varsigma, cg_max)?;
            let next = field.value(&step.point)?;
            newton.iters += 1;
            newton.nf += 1;
            newton.ncg += step.ncg;
            newton.history.push(NewtonRecord {
                k: newton.iters,
                residual: next.norm,
                ncg: step.ncg,
                exit: step.exit,
                linear_residual: step.linear_residual,
            });
            let increased = !(next.norm < value.norm);
            if increased && step.exit != CgExit::Converged {
                break HybridStatus::NewtonStalled;
            }
            if increased {
                newton.nonmonotone_steps += 1;
            }
            x = step.point;
            value = next;
        }
    };
    newton.res_final = value.norm;
    newton.wall_time = newton_timer.seconds();

    Ok(HybridSolved {
        point: x,
        value,
        report: HybridReport {
            status,
            prp: phase1.report,
            newton,
            wall_time: timer.seconds(),
        },
    })
}
