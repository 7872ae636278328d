//! Multi-trial experiments and their aggregated table rows.
//!
//! Trial `i` draws its problem from stream `base_seed + i`, so the set of
//! outcomes does not depend on how many worker threads run them or in which
//! order they finish. Rows are folded in trial order.

use mz_core::manifold::{ManifoldKind, SpdRetraction};
use mz_core::newton::HybridSolved;
use mz_core::prp::SolveReport;
use mz_core::{hybrid_solve, prp_solve, HybridConfig, HorizontalJacobian, PrpConfig, VectorField};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generate::{FieldKind, Problem};
use crate::rng::trial_stream;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Solver {
    Prp,
    Hybrid,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Prp => "prp",
            Solver::Hybrid => "hybrid",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub field: FieldKind,
    pub m: usize,
    /// Ignored for the SPD field.
    pub p: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub solver: Solver,
    pub prp: PrpConfig,
    /// Only the Newton-phase settings are read; the PRP phase uses `prp`.
    pub hybrid: HybridConfig,
    pub spd_retraction: SpdRetraction,
    /// Record wall-clock times; with `false` every CT is 0 and output is
    /// byte-for-byte reproducible.
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(field: FieldKind, m: usize, p: usize) -> Self {
        ExperimentSpec {
            field,
            m,
            p,
            trials: 10,
            base_seed: 0,
            solver: Solver::Prp,
            prp: PrpConfig::default(),
            hybrid: HybridConfig::default(),
            spd_retraction: SpdRetraction::SecondOrder,
            timing: true,
        }
    }

    /// `p` as it appears in output (the matrix size for the SPD field).
    pub fn p_column(&self) -> usize {
        match self.field {
            FieldKind::LogdetSpd => self.m,
            _ => self.p,
        }
    }

    pub fn kind(&self) -> ManifoldKind {
        match self.field {
            FieldKind::LogdetSpd => ManifoldKind::Spd { m: self.m },
            _ => ManifoldKind::Stiefel {
                m: self.m,
                p: self.p,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Usage("trials must be at least 1".into()));
        }
        match self.field {
            FieldKind::LogdetSpd if self.solver == Solver::Hybrid => Err(Error::Usage(
                "the hybrid solver needs a Jacobian lift; logdet-spd has none".into(),
            )),
            FieldKind::LogdetSpd if self.m == 0 => Err(Error::Usage("m must be at least 1".into())),
            FieldKind::TraceRatio if self.p == 0 || self.m <= 2 * self.p => {
                Err(Error::ConstraintViolated {
                    m: self.m,
                    p: self.p,
                })
            }
            FieldKind::Oja | FieldKind::TraceRatio if self.p == 0 || self.m <= self.p => {
                Err(Error::Usage("Stiefel problems need m > p >= 1".into()))
            }
            _ => {
                self.prp.validate()?;
                if self.solver == Solver::Hybrid {
                    HybridConfig {
                        prp: self.prp.clone(),
                        ..self.hybrid.clone()
                    }
                    .validate()?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Prp,
    Newton,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Prp => "prp",
            Phase::Newton => "newton",
        }
    }
}

/// One row of a residual trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryRow {
    pub iter: usize,
    pub residual: f64,
    pub alpha: f64,
    pub sign: i8,
    pub backtracks: usize,
    pub phase: Phase,
}

/// Statistics of one solver phase of one trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseStats {
    pub ct: f64,
    pub it: usize,
    pub nf: usize,
    pub ncg: usize,
    pub res0: f64,
    pub res: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub converged: bool,
    /// Solver status, or the error that aborted the trial.
    pub status: String,
    pub total: PhaseStats,
    /// PRP and Newton phases of a hybrid run.
    pub phases: Option<[PhaseStats; 2]>,
    pub history: Vec<HistoryRow>,
    pub invariant_violations: usize,
    pub reprojections: usize,
    pub max_feasibility_error: f64,
}

/// Means over the converged trials; failed trials only show up in
/// `failures`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableRow {
    pub m: usize,
    pub p: usize,
    pub dim: usize,
    pub ct: f64,
    pub it: f64,
    pub nf: f64,
    pub ncg: f64,
    pub res0: f64,
    pub res: f64,
    pub failures: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseRow {
    pub phase: Phase,
    pub ct: f64,
    pub it: f64,
    pub nf: f64,
    pub ncg: f64,
    pub res0: f64,
    pub res: f64,
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub row: TableRow,
    pub phases: Option<[PhaseRow; 2]>,
    pub trials: Vec<TrialOutcome>,
}

impl Experiment {
    pub fn all_converged(&self) -> bool {
        self.row.failures == 0
    }
}

fn prp_history(report: &SolveReport) -> Vec<HistoryRow> {
    report
        .history
        .iter()
        .map(|h| HistoryRow {
            iter: h.k,
            residual: h.residual,
            alpha: h.alpha,
            sign: h.sign,
            backtracks: h.backtracks,
            phase: Phase::Prp,
        })
        .collect()
}

fn prp_stats(report: &SolveReport, timing: bool) -> PhaseStats {
    PhaseStats {
        ct: if timing { report.wall_time } else { 0.0 },
        it: report.iters,
        nf: report.nf,
        ncg: 0,
        res0: report.res0,
        res: report.res_final,
    }
}

fn prp_outcome(trial: usize, report: SolveReport, timing: bool) -> TrialOutcome {
    TrialOutcome {
        trial,
        converged: report.converged(),
        status: format!("{:?}", report.status),
        total: prp_stats(&report, timing),
        phases: None,
        history: prp_history(&report),
        invariant_violations: report.invariant_violations,
        reprojections: report.reprojections,
        max_feasibility_error: report.max_feasibility_error,
    }
}

fn hybrid_outcome(trial: usize, solved: HybridSolved, timing: bool) -> TrialOutcome {
    let r = solved.report;
    let first = prp_stats(&r.prp, timing);
    let n = &r.newton;
    let second = PhaseStats {
        ct: if timing { n.wall_time } else { 0.0 },
        it: n.iters,
        nf: n.nf,
        ncg: n.ncg,
        res0: n.res_start,
        res: n.res_final,
    };
    let mut history = prp_history(&r.prp);
    let offset = r.prp.iters;
    history.extend(n.history.iter().skip(1).map(|h| HistoryRow {
        iter: offset + h.k,
        residual: h.residual,
        alpha: 1.0,
        sign: 1,
        backtracks: 0,
        phase: Phase::Newton,
    }));
    TrialOutcome {
        trial,
        converged: r.converged(),
        status: format!("{:?}", r.status),
        total: PhaseStats {
            ct: if timing { r.wall_time } else { 0.0 },
            it: first.it + second.it,
            nf: first.nf + second.nf,
            ncg: second.ncg,
            res0: first.res0,
            res: second.res,
        },
        phases: Some([first, second]),
        history,
        invariant_violations: r.prp.invariant_violations,
        reprojections: r.prp.reprojections,
        max_feasibility_error: r.prp.max_feasibility_error,
    }
}

fn failed(trial: usize, err: &mz_core::Error) -> TrialOutcome {
    let nan = PhaseStats {
        ct: 0.0,
        it: 0,
        nf: 0,
        ncg: 0,
        res0: f64::NAN,
        res: f64::NAN,
    };
    TrialOutcome {
        trial,
        converged: false,
        status: format!("error: {err}"),
        total: nan,
        phases: None,
        history: Vec::new(),
        invariant_violations: 0,
        reprojections: 0,
        max_feasibility_error: 0.0,
    }
}

fn solve_prp<F: VectorField>(
    field: &F,
    x0: mz_core::field::PointOf<F>,
    spec: &ExperimentSpec,
    trial: usize,
) -> TrialOutcome {
    match prp_solve(field, x0, &spec.prp) {
        Ok(s) => prp_outcome(trial, s.report, spec.timing),
        Err(e) => failed(trial, &e),
    }
}

fn solve_hybrid<F: HorizontalJacobian>(
    field: &F,
    x0: mz_core::manifold::StiefelPoint,
    spec: &ExperimentSpec,
    trial: usize,
) -> TrialOutcome {
    let cfg = HybridConfig {
        prp: spec.prp.clone(),
        ..spec.hybrid.clone()
    };
    match hybrid_solve(field, x0, &cfg) {
        Ok(s) => hybrid_outcome(trial, s, spec.timing),
        Err(e) => failed(trial, &e),
    }
}

/// Generates and solves trial `trial` of `spec`.
///
/// Generation errors are returned; solver errors mark the trial as failed.
pub fn run_trial(spec: &ExperimentSpec, trial: usize) -> Result<TrialOutcome> {
    let mut rng = trial_stream(spec.base_seed, trial as u64);
    let problem = Problem::generate(spec.field, spec.m, spec.p, &mut rng, spec.spd_retraction)?;
    Ok(match (problem, spec.solver) {
        (Problem::Oja(f, x0), Solver::Prp) => solve_prp(&f, x0, spec, trial),
        (Problem::TraceRatio(f, x0), Solver::Prp) => solve_prp(&f, x0, spec, trial),
        (Problem::LogDet(f, x0), Solver::Prp) => solve_prp(&f, x0, spec, trial),
        (Problem::Oja(f, x0), Solver::Hybrid) => solve_hybrid(&f, x0, spec, trial),
        (Problem::TraceRatio(f, x0), Solver::Hybrid) => solve_hybrid(&f, x0, spec, trial),
        (Problem::LogDet(..), Solver::Hybrid) => {
            return Err(Error::Usage(
                "the hybrid solver needs a Jacobian lift; logdet-spd has none".into(),
            ))
        }
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

fn sorted(outcomes: &[TrialOutcome]) -> Vec<&TrialOutcome> {
    let mut v: Vec<&TrialOutcome> = outcomes.iter().collect();
    v.sort_by_key(|o| o.trial);
    v
}

fn phase_mean(outcomes: &[&TrialOutcome], pick: impl Fn(&TrialOutcome) -> PhaseStats) -> MeanStats {
    let ok: Vec<PhaseStats> = outcomes.iter().filter(|o| o.converged).map(|o| pick(o)).collect();
    MeanStats {
        ct: mean(ok.iter().map(|s| s.ct)),
        it: mean(ok.iter().map(|s| s.it as f64)),
        nf: mean(ok.iter().map(|s| s.nf as f64)),
        ncg: mean(ok.iter().map(|s| s.ncg as f64)),
        res0: mean(ok.iter().map(|s| s.res0)),
        res: mean(ok.iter().map(|s| s.res)),
    }
}

struct MeanStats {
    ct: f64,
    it: f64,
    nf: f64,
    ncg: f64,
    res0: f64,
    res: f64,
}

/// Folds trial outcomes into a table row, in trial order.
pub fn aggregate(spec: &ExperimentSpec, outcomes: &[TrialOutcome]) -> TableRow {
    let ordered = sorted(outcomes);
    let s = phase_mean(&ordered, |o| o.total);
    TableRow {
        m: spec.m,
        p: spec.p_column(),
        dim: spec.kind().dim(),
        ct: s.ct,
        it: s.it,
        nf: s.nf,
        ncg: s.ncg,
        res0: s.res0,
        res: s.res,
        failures: ordered.iter().filter(|o| !o.converged).count(),
    }
}

/// Per-phase rows of a hybrid experiment, in trial order.
pub fn aggregate_phases(outcomes: &[TrialOutcome]) -> Option<[PhaseRow; 2]> {
    let ordered = sorted(outcomes);
    if ordered.iter().any(|o| o.converged && o.phases.is_none()) {
        return None;
    }
    let row = |phase: Phase, idx: usize| {
        let s = phase_mean(&ordered, |o| o.phases.map_or(o.total, |p| p[idx]));
        PhaseRow {
            phase,
            ct: s.ct,
            it: s.it,
            nf: s.nf,
            ncg: s.ncg,
            res0: s.res0,
            res: s.res,
        }
    };
    Some([row(Phase::Prp, 0), row(Phase::Newton, 1)])
}

/// Runs all trials of `spec` on `jobs` worker threads.
pub fn run_experiment(spec: &ExperimentSpec, jobs: usize) -> Result<Experiment> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    let trials: Vec<TrialOutcome> = pool.install(|| {
        (0..spec.trials)
            .into_par_iter()
            .map(|t| run_trial(spec, t))
            .collect::<Result<_>>()
    })?;
    let row = aggregate(spec, &trials);
    let phases = match spec.solver {
        Solver::Hybrid => aggregate_phases(&trials),
        Solver::Prp => None,
    };
    Ok(Experiment {
        spec: spec.clone(),
        row,
        phases,
        trials,
    })
}
