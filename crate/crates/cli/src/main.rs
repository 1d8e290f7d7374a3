//! `gpoincare`: command-line driver for discrete Poincaré inequality checks.
//!
//! Exit codes: 0 pass, 1 verdict failure, 2 usage or input error, 3 window or
//! memory budget exceeded.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use graph_poincare::Error;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "gpoincare", version, about = "Check discrete Poincaré inequalities on graphs and trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON file of default flag values; flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write timestamps and run duration to this JSON file, kept apart from
    /// the deterministic outputs.
    #[arg(long, global = true, value_name = "FILE")]
    meta: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a seeded randomized suite of inequality checks.
    Verify(VerifyArgs),
    /// Reproduce an experiment and write `{family}.csv` and `{family}.verdict.json`.
    Reproduce(ReproduceArgs),
    /// Estimate (and at p = 2 certify) the optimal constant of one region.
    Estimate(EstimateArgs),
    /// Estimated constants of balls against the quasiconvex upper bound.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Thm21,
    Cor23,
    Thm41,
    Doubling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Ex31,
    Ex32,
    Prop34,
    Thm35,
    Flow,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Master seed; required unless `--trials 0`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of instances [default: 500 for thm21 and thm41, 200 otherwise].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Relative tolerance of each inequality verdict [default: 1e-9].
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Also write the summary to `{out}/{suite}.json`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub family: Experiment,
    /// Exponents, e.g. `1.5,2,inf`.
    #[arg(long)]
    pub p: Option<String>,
    /// Sizes `k`: a list `8,16,32` or a range `8..256`.
    #[arg(long)]
    pub k: Option<String>,
    /// Radii `r`: a list or a range.
    #[arg(long)]
    pub r: Option<String>,
    /// Read ranges as powers of two times their start.
    #[arg(long)]
    pub geometric: bool,
    /// Branching number of the homogeneous tree [default: 2].
    #[arg(long)]
    pub b: Option<u32>,
    /// Randomized trials (flow: 500; prop34 split trials: 100).
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative tolerance of inequality verdicts (flow only).
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Output directory [default: .].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct GraphSource {
    /// Edge-list file.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    /// Generated family, e.g. `homogeneous_tree:b=2,depth=4`.
    #[arg(long, value_name = "SPEC")]
    pub family: Option<String>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub source: GraphSource,
    /// Measure JSON file [default: counting measure].
    #[arg(long, value_name = "FILE")]
    pub measure: Option<PathBuf>,
    /// `all`, `ball:CENTER,RADIUS` or `set:V1,V2,...`.
    #[arg(long, default_value = "all")]
    pub region: String,
    /// Exponent [default: 2].
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Estimator restarts [default: 50].
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Ascent iterations per restart [default: 300].
    #[arg(long)]
    pub iters: Option<usize>,
    /// Also write the estimate to `{out}/estimate.json`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, value_name = "FILE")]
    pub measure: Option<PathBuf>,
    /// Centre of the balls.
    #[arg(long, default_value_t = 0)]
    pub center: u32,
    /// Radii [default: 1..3].
    #[arg(long)]
    pub r: Option<String>,
    /// Exponents [default: 2].
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// Relative tolerance of `lower <= bound` [default: 1e-9].
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Output directory for `sweep.csv` and `sweep.verdict.json` [default: .].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// A usage error; exits with code 2.
pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Error::Input(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Budget(_) | Error::Window(_)) => 3,
        _ => 2,
    }
}

#[derive(Serialize)]
struct Meta {
    args: Vec<String>,
    version: &'static str,
    started_unix_ms: u128,
    elapsed_ms: u128,
    exit_code: u8,
}

fn main() -> ExitCode {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
    let clock = Instant::now();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => commands::verify(a, cli.config.as_deref()),
        Command::Reproduce(a) => commands::reproduce(a, cli.config.as_deref()),
        Command::Estimate(a) => commands::estimate(a, cli.config.as_deref()),
        Command::Sweep(a) => commands::sweep(a, cli.config.as_deref()),
    };
    let code = match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    };
    if let Some(path) = cli.meta {
        let meta = Meta {
            args: std::env::args().collect(),
            version: env!("CARGO_PKG_VERSION"),
            started_unix_ms: started,
            elapsed_ms: clock.elapsed().as_millis(),
            exit_code: code,
        };
        let text = serde_json::to_string_pretty(&meta).expect("meta serializes");
        if let Err(e) = std::fs::write(&path, text + "\n") {
            eprintln!("warning: could not write {}: {e}", path.display());
        }
    }
    ExitCode::from(code)
}
