//! Config-driven experiment runner for `cal-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use cal_core::CalError;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::run_kind;
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{CliError, CliResult, EXIT_OK};
use crate::output::OutDir;

pub const SCHEMA_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";
pub const TIMING_FILE: &str = "timing.json";

#[derive(Debug, Parser)]
#[command(name = "cal", version, about = "Run learning-dynamics experiments from a JSON config")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Characteristic polynomial, stability and root-reality report.
    Analyze(RunArgs),
    /// Causal integration, with the reset schedule when one is configured.
    Simulate(RunArgs),
    /// Distance of the second-order reduction to the gradient flow over θ.
    CompareGradientFlow(RunArgs),
    /// Discrete action minimizer against the ODE solution.
    ActionOracle(RunArgs),
    /// Both reset modes on the configured schedule.
    ResetExperiment(RunArgs),
    /// Runs several configs in parallel; each sets `run.kind`.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Overrides {
    /// Overrides `run.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `run.step`.
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to `run.out`, then `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub configs: Vec<PathBuf>,
    /// Each config writes to `<out>/<index>_<file stem>`.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NumericalFailure,
    CheckFailed,
}

#[derive(Debug, Serialize)]
pub struct Failure {
    pub message: String,
    /// Time at which the state left the finite range.
    pub blow_up_time: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    pub status: Status,
    /// Effective configuration; parses back to the same config.
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<serde_json::Value>,
}

#[derive(Debug, Serialize)]
struct Timing {
    kind: ExperimentKind,
    wall_seconds: f64,
}

/// Loads `path`, applies the overrides and pins `run.kind`.
pub fn effective_config(path: &Path, kind: Option<ExperimentKind>, o: &Overrides) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(kind) = kind {
        match cfg.run.kind {
            Some(k) if k != kind => {
                return Err(CliError::config(
                    "run.kind",
                    format!("config is for {}, invoked as {}", k.name(), kind.name()),
                ))
            }
            _ => cfg.run.kind = Some(kind),
        }
    }
    if let Some(seed) = o.seed {
        cfg.run.seed = seed;
    }
    if let Some(step) = o.step {
        cfg.run.step = step;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one experiment and writes its report. Numerical failures and failed
/// checks still produce a report; config errors do not.
pub fn execute(kind: ExperimentKind, cfg: &ExperimentConfig, out: &Path) -> CliResult<()> {
    let start = Instant::now();
    let dir = OutDir::create(out)?;
    log::info!("{} -> {}", kind.name(), out.display());
    let outcome = run_kind(kind, cfg, &dir);
    let (status, failure, result, err) = match outcome {
        Ok(o) => match o.check_failure {
            None => (Status::Ok, None, Some(o.result), None),
            Some(msg) => (
                Status::CheckFailed,
                Some(Failure {
                    message: msg.clone(),
                    blow_up_time: None,
                }),
                Some(o.result),
                Some(CliError::Check(msg)),
            ),
        },
        Err(CliError::Numerical(e)) => {
            let blow_up_time = match e {
                CalError::NonFinite { t } => Some(t),
                _ => None,
            };
            let failure = Failure {
                message: e.to_string(),
                blow_up_time,
            };
            (Status::NumericalFailure, Some(failure), None, Some(CliError::Numerical(e)))
        }
        Err(e) => return Err(e),
    };
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        kind,
        status,
        config: cfg.clone(),
        failure,
        result,
    };
    dir.write_json(REPORT_FILE, &report)?;
    dir.write_json(
        TIMING_FILE,
        &Timing {
            kind,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    )?;
    log::info!("{} finished with status {status:?}", kind.name());
    err.map_or(Ok(()), Err)
}

fn out_dir(flag: Option<&PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.cloned()
        .or_else(|| cfg.run.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn single(kind: ExperimentKind, args: &RunArgs) -> CliResult<()> {
    let cfg = effective_config(&args.config, Some(kind), &args.overrides)?;
    execute(kind, &cfg, &out_dir(args.out.as_ref(), &cfg))
}

#[derive(Debug, Serialize)]
struct SweepEntry {
    config: String,
    out: String,
    exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn sweep_one(i: usize, path: &Path, args: &SweepArgs) -> SweepEntry {
    let stem = path.file_stem().map_or("config".into(), |s| s.to_string_lossy().into_owned());
    let out = args.out.join(format!("{i}_{stem}"));
    let res = effective_config(path, None, &args.overrides).and_then(|cfg| {
        let kind = cfg
            .run
            .kind
            .ok_or_else(|| CliError::config("run.kind", "sweep configs must set run.kind"))?;
        execute(kind, &cfg, &out)
    });
    SweepEntry {
        config: path.display().to_string(),
        out: out.display().to_string(),
        exit_code: res.as_ref().map_or_else(CliError::exit_code, |_| EXIT_OK),
        error: res.err().map(|e| e.to_string()),
    }
}

fn sweep(args: &SweepArgs) -> CliResult<i32> {
    let work = || -> Vec<SweepEntry> {
        args.configs
            .par_iter()
            .enumerate()
            .map(|(i, p)| sweep_one(i, p, args))
            .collect()
    };
    let entries = match args.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::config("--jobs", e.to_string()))?
            .install(work),
        None => work(),
    };
    for e in &entries {
        if let Some(err) = &e.error {
            log::error!("{}: {err}", e.config);
        }
    }
    OutDir::create(&args.out)?.write_json("sweep.json", &entries)?;
    Ok(entries.iter().map(|e| e.exit_code).max().unwrap_or(EXIT_OK))
}

/// Runs the parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let res = match &cli.command {
        Command::Analyze(a) => single(ExperimentKind::Analyze, a),
        Command::Simulate(a) => single(ExperimentKind::Simulate, a),
        Command::CompareGradientFlow(a) => single(ExperimentKind::CompareGradientFlow, a),
        Command::ActionOracle(a) => single(ExperimentKind::ActionOracle, a),
        Command::ResetExperiment(a) => single(ExperimentKind::ResetExperiment, a),
        Command::Sweep(a) => match sweep(a) {
            Ok(code) => return code,
            Err(e) => Err(e),
        },
    };
    match res {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
