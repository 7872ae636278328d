//! Command-line interface.
//!
//! Settings are resolved as built-in defaults, then the `--config` file, then
//! flags. Exit codes: 0 when every trial converged, 2 when some did not, 1 on
//! bad usage or I/O failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mz_core::manifold::SpdRetraction;
use mz_core::{HybridConfig, PrpConfig};

use crate::bench::{run_experiment, run_trial, Experiment, ExperimentSpec, Solver, TrialOutcome};
use crate::config::FileConfig;
use crate::emit::{emit_history, emit_phases, emit_table, history_file_name, sci, table_file_name};
use crate::error::{Error, Result};
use crate::generate::FieldKind;

#[derive(Debug, Parser)]
#[command(
    name = "mz",
    version,
    about = "Find zeros of tangent vector fields on matrix manifolds with a derivative-free PRP method"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one generated problem and print a summary
    Solve(SolveArgs),
    /// Run a multi-trial PRP experiment and write its table row as CSV
    Bench(BenchArgs),
    /// Run a multi-trial PRP-then-Newton experiment
    Hybrid(HybridArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RetractionArg {
    SecondOrder,
    Additive,
}

impl From<RetractionArg> for SpdRetraction {
    fn from(r: RetractionArg) -> Self {
        match r {
            RetractionArg::SecondOrder => SpdRetraction::SecondOrder,
            RetractionArg::Additive => SpdRetraction::Additive,
        }
    }
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Vector field to solve for
    #[arg(long, value_enum)]
    pub field: FieldKind,
    /// Rows of the matrix variable
    #[arg(long)]
    pub m: usize,
    /// Columns of the Stiefel variable (not used by logdet-spd)
    #[arg(long)]
    pub p: Option<usize>,
    /// Base random seed; trial i uses seed + i [default: 0]
    #[arg(long, env = "MZ_SEED")]
    pub seed: Option<u64>,
    /// TOML settings file; flags take precedence over it
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PrpArgs {
    /// Backtracking factor rho [default: 0.5]
    #[arg(long)]
    pub rho: Option<f64>,
    /// Sufficient-decrease weight on alpha^2 |dX|^2 [default: 1e-10]
    #[arg(long)]
    pub t1: Option<f64>,
    /// Sufficient-decrease weight on alpha^2 f(X) [default: 1e-10]
    #[arg(long)]
    pub t2: Option<f64>,
    /// Averaging weight lambda of the non-monotone reference [default: 0.6]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Absolute stopping tolerance e_a [default: 1e-6]
    #[arg(long = "e-a")]
    pub e_a: Option<f64>,
    /// Relative stopping tolerance e_r [default: 1e-5]
    #[arg(long = "e-r")]
    pub e_r: Option<f64>,
    /// Probe step epsilon of the initial step heuristic [default: 1e-8]
    #[arg(long)]
    pub eps_fd: Option<f64>,
    /// Smallest initial step [default: 1e-10]
    #[arg(long)]
    pub alpha_min: Option<f64>,
    /// Largest initial step [default: 1e10]
    #[arg(long)]
    pub alpha_max: Option<f64>,
    /// Iteration cap [default: 20000]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Retraction on the SPD cone [default: second-order]
    #[arg(long, value_enum)]
    pub spd_retraction: Option<RetractionArg>,
    /// Write 0 for every CT so output files are reproducible
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub prp: PrpArgs,
    /// Write the residual history to this CSV file
    #[arg(long, value_name = "FILE")]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub prp: PrpArgs,
    /// Number of random problems [default: 10]
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads [default: 1]
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Table CSV file, or a directory to write <field>_<m>x<p>_<solver>.csv
    /// into; printed to stdout when omitted
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Also write one residual-history CSV per trial into this directory
    #[arg(long, value_name = "DIR")]
    pub history_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HybridArgs {
    #[command(flatten)]
    pub bench: BenchArgs,
    /// Residual at which the PRP phase hands over to Newton [default: 1e-3]
    #[arg(long)]
    pub zeta1: Option<f64>,
    /// Final residual of the Newton phase [default: 1e-7]
    #[arg(long)]
    pub zeta2: Option<f64>,
    /// Cap on the CG forcing term [default: 1e-8]
    #[arg(long)]
    pub varsigma: Option<f64>,
    /// CG iterations per Newton step [default: min(p(m-p), 2000)]
    #[arg(long)]
    pub cg_max: Option<usize>,
    /// Per-phase CSV path; printed to stdout when omitted
    #[arg(long, value_name = "FILE")]
    pub phases_out: Option<PathBuf>,
}

fn file_config(problem: &ProblemArgs) -> Result<FileConfig> {
    match &problem.config {
        Some(path) => FileConfig::load(path),
        None => Ok(FileConfig::default()),
    }
}

fn prp_config(file: &FileConfig, a: &PrpArgs) -> PrpConfig {
    let d = PrpConfig::default();
    PrpConfig {
        rho: a.rho.or(file.rho).unwrap_or(d.rho),
        t1: a.t1.or(file.t1).unwrap_or(d.t1),
        t2: a.t2.or(file.t2).unwrap_or(d.t2),
        lambda: a.lambda.or(file.lambda).unwrap_or(d.lambda),
        e_a: a.e_a.or(file.e_a).unwrap_or(d.e_a),
        e_r: a.e_r.or(file.e_r).unwrap_or(d.e_r),
        eps_fd: a.eps_fd.or(file.eps_fd).unwrap_or(d.eps_fd),
        alpha_min: a.alpha_min.or(file.alpha_min).unwrap_or(d.alpha_min),
        alpha_max: a.alpha_max.or(file.alpha_max).unwrap_or(d.alpha_max),
        max_iter: a.max_iter.or(file.max_iter).unwrap_or(d.max_iter),
        ..d
    }
}

fn retraction(file: &FileConfig, a: &PrpArgs) -> Result<SpdRetraction> {
    if let Some(r) = a.spd_retraction {
        return Ok(r.into());
    }
    match &file.spd_retraction {
        None => Ok(SpdRetraction::SecondOrder),
        Some(s) => RetractionArg::from_str(s, true)
            .map(Into::into)
            .map_err(|_| Error::Usage(format!("unknown spd-retraction {s:?}"))),
    }
}

fn base_spec(file: &FileConfig, problem: &ProblemArgs, prp: &PrpArgs) -> Result<ExperimentSpec> {
    let p = match (problem.field, problem.p) {
        (FieldKind::LogdetSpd, p) => p.unwrap_or(0),
        (_, Some(p)) => p,
        (_, None) => return Err(Error::Usage(format!("--p is required for {}", problem.field.name()))),
    };
    Ok(ExperimentSpec {
        base_seed: problem.seed.or(file.seed).unwrap_or(0),
        prp: prp_config(file, prp),
        spd_retraction: retraction(file, prp)?,
        timing: !prp.no_timing,
        ..ExperimentSpec::new(problem.field, problem.m, p)
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn io_err(source: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn solve(args: SolveArgs, out: &mut dyn Write) -> Result<bool> {
    let file = file_config(&args.problem)?;
    let spec = ExperimentSpec {
        trials: 1,
        ..base_spec(&file, &args.problem, &args.prp)?
    };
    spec.validate()?;
    let t = run_trial(&spec, 0)?;
    print_summary(&spec, &t, out).map_err(io_err)?;
    if let Some(path) = &args.history {
        write_file(path, &emit_history(&t.history)?)?;
    }
    Ok(t.converged)
}

fn print_summary(spec: &ExperimentSpec, t: &TrialOutcome, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "field   {}", spec.field.name())?;
    writeln!(out, "m       {}", spec.m)?;
    writeln!(out, "p       {}", spec.p_column())?;
    writeln!(out, "DIM     {}", spec.kind().dim())?;
    writeln!(out, "seed    {}", spec.base_seed)?;
    writeln!(out, "status  {}", t.status)?;
    writeln!(out, "IT      {}", t.total.it)?;
    writeln!(out, "NF      {}", t.total.nf)?;
    writeln!(out, "Res0    {}", sci(t.total.res0))?;
    writeln!(out, "Res     {}", sci(t.total.res))?;
    writeln!(out, "CT      {}", sci(t.total.ct))
}

fn bench_spec(args: &BenchArgs, file: &FileConfig, solver: Solver) -> Result<(ExperimentSpec, usize)> {
    let spec = ExperimentSpec {
        trials: args.trials.or(file.trials).unwrap_or(10),
        solver,
        ..base_spec(file, &args.problem, &args.prp)?
    };
    Ok((spec, args.jobs.or(file.jobs).unwrap_or(1)))
}

fn write_outputs(e: &Experiment, args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let table = emit_table(&[e.row])?;
    match &args.out {
        Some(path) if path.is_dir() => write_file(&path.join(default_table_name(&e.spec)), &table)?,
        Some(path) => write_file(path, &table)?,
        None => out.write_all(table.as_bytes()).map_err(io_err)?,
    }
    if let Some(dir) = &args.history_dir {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
        let s = &e.spec;
        for t in &e.trials {
            let name = history_file_name(s.field, s.m, s.p_column(), s.solver, t.trial);
            write_file(&dir.join(name), &emit_history(&t.history)?)?;
        }
    }
    for t in e.trials.iter().filter(|t| !t.converged) {
        eprintln!("trial {}: {}", t.trial, t.status);
    }
    Ok(())
}

fn bench(args: BenchArgs, out: &mut dyn Write) -> Result<bool> {
    let file = file_config(&args.problem)?;
    let (spec, jobs) = bench_spec(&args, &file, Solver::Prp)?;
    let e = run_experiment(&spec, jobs)?;
    write_outputs(&e, &args, out)?;
    Ok(e.all_converged())
}

fn hybrid(args: HybridArgs, out: &mut dyn Write) -> Result<bool> {
    let file = file_config(&args.bench.problem)?;
    let (mut spec, jobs) = bench_spec(&args.bench, &file, Solver::Hybrid)?;
    let d = HybridConfig::default();
    spec.hybrid = HybridConfig {
        zeta1: args.zeta1.or(file.zeta1).unwrap_or(d.zeta1),
        zeta2: args.zeta2.or(file.zeta2).unwrap_or(d.zeta2),
        varsigma: args.varsigma.or(file.varsigma).unwrap_or(d.varsigma),
        cg_max: args.cg_max.or(file.cg_max),
        ..d
    };
    let e = run_experiment(&spec, jobs)?;
    write_outputs(&e, &args.bench, out)?;
    if let Some(rows) = &e.phases {
        let text = emit_phases(rows)?;
        match &args.phases_out {
            Some(path) => write_file(path, &text)?,
            None => out.write_all(text.as_bytes()).map_err(io_err)?,
        }
    }
    Ok(e.all_converged())
}

fn default_table_name(spec: &ExperimentSpec) -> String {
    table_file_name(spec.field, spec.m, spec.p_column(), spec.solver)
}

/// Runs a parsed command. `Ok(false)` means some trial did not converge.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<bool> {
    match cli.command {
        Command::Solve(a) => solve(a, out),
        Command::Bench(a) => bench(a, out),
        Command::Hybrid(a) => hybrid(a, out),
    }
}
