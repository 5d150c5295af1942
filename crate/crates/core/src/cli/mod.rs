//! Command-line front end: bounds, estimates, bound-versus-estimate
//! comparisons and parameter sweeps, all driven by a JSON config.
//!
//! Exit codes are 0 on success, 1 on config or IO errors and 2 when no bound
//! applies or the estimator's hypotheses fail.

mod commands;
mod config;
mod render;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::measures::MeasureError;
use crate::montecarlo::MonteCarloError;
use crate::processes::ProcessError;
use crate::simulate::SimulateError;

pub use commands::{
    cmd_bound, cmd_compare, cmd_estimate, cmd_sweep, sweep_values, BoundMargin, BoundOutput, Check, CompareOutput,
    EstimateOutput, RunOverrides, SweepOverrides, SCHEMA_VERSION, SWEEP_HEADER,
};
pub use config::{EstimatorConfig, ExperimentConfig, LoadedConfig, SweepConfig};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ADDGAP_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },
    #[error("config error at `{field}`: {message}")]
    ConfigParse { field: String, message: String },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("unknown parameter path `{0}` (expected a numeric field such as `horizon` or `process2.levy.lambda`)")]
    UnknownParameterPath(String),
    #[error("no estimator settings: add an \"estimator\" block to the config or pass --paths")]
    MissingEstimator,
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("{THREADS_ENV} must be a positive integer, got `{0}`")]
    Threads(String),
    #[error(transparent)]
    Estimate(#[from] MonteCarloError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Estimate(e) if is_hypothesis_failure(e) => 2,
            _ => 1,
        }
    }
}

/// Failures meaning the estimator does not apply to the configured pair.
pub(crate) fn is_hypothesis_failure(e: &MonteCarloError) -> bool {
    matches!(
        e,
        MonteCarloError::HypothesisFailed(_)
            | MonteCarloError::Measure(MeasureError::NotAbsolutelyContinuous { .. })
            | MonteCarloError::Measure(MeasureError::DivergentIntegral(_))
            | MonteCarloError::Process(ProcessError::Measure(MeasureError::DivergentIntegral(_)))
            | MonteCarloError::Simulate(SimulateError::DivergentMass)
    )
}

#[derive(Debug, Parser)]
#[command(name = "addgap", version, about = "L1 distance bounds between additive processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print every ingredient and bound.
    Bound(BoundArgs),
    /// Monte Carlo estimate of the distance or of an identity check.
    Estimate(EstimateArgs),
    /// Bounds set against a Monte Carlo estimate.
    Compare(CompareArgs),
    /// Sweep one numeric config field and write a CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Emit JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Number of simulated paths.
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Truncation level for infinite-activity measures.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub base: BoundArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value_t = Check::Tv)]
    pub check: Check,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub base: BoundArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Dotted path of the swept field, e.g. `process2.levy.lambda`.
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

/// Worker-thread cap from [`THREADS_ENV`].
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Threads(v)),
        },
        Err(_) => Ok(None),
    }
}

fn overrides(run: &RunArgs, threads: Option<usize>) -> RunOverrides {
    RunOverrides { n_paths: run.paths, seed: run.seed, epsilon: run.epsilon, threads }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs serialize");
    s.push('\n');
    s
}

/// Runs one command, writing its output to `out`; returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    let threads = threads_from_env()?;
    let io = |e: std::io::Error| CliError::Io { path: "<stdout>".into(), message: e.to_string() };
    match &cli.command {
        Command::Bound(a) => {
            let res = cmd_bound(&a.config)?;
            let text = if a.json { json(&res) } else { render::bound_table(&res) };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(if res.report.has_applicable_bound() { 0 } else { 2 })
        }
        Command::Estimate(a) => {
            let res = cmd_estimate(&a.base.config, &overrides(&a.run, threads), a.check)?;
            let text = if a.base.json { json(&res) } else { render::estimate_table(&res) };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(0)
        }
        Command::Compare(a) => {
            let res = cmd_compare(&a.base.config, &overrides(&a.run, threads))?;
            let text = if a.base.json { json(&res) } else { render::compare_table(&res) };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(if res.report.has_applicable_bound() { 0 } else { 2 })
        }
        Command::Sweep(a) => {
            let sweep = SweepOverrides { param: a.param.clone(), from: a.from, to: a.to, steps: a.steps };
            let csv = cmd_sweep(&a.config, &sweep, &overrides(&a.run, threads))?;
            match &a.out {
                Some(p) => std::fs::write(p, csv)
                    .map_err(|e| CliError::Io { path: p.display().to_string(), message: e.to_string() })?,
                None => out.write_all(csv.as_bytes()).map_err(io)?,
            }
            Ok(0)
        }
    }
}
