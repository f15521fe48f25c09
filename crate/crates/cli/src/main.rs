use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use safegp_cli::settings::resolve;
use safegp_cli::{cmd_calibrate, cmd_compare_bounds, cmd_evaluate, cmd_run_sal, CliError, CliResult};
use serde::Serialize;

/// Trajectory safety deciders and safe active learning with Gaussian processes.
///
/// Every command reads defaults, then `--config` (JSON or `key = value`
/// lines), then the flags given on the command line. Set `SAFEGP_THREADS`
/// to fix the worker count.
#[derive(Parser)]
#[command(name = "safegp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare the empirical supremum tail with the Borell-TIS bounds.
    CompareBounds(CompareBoundsArgs),
    /// Run safe active learning on a preset.
    RunSal(RunSalArgs),
    /// Measure decision error rates on synthetic processes.
    Calibrate(CalibrateArgs),
    /// Decide safety of one trajectory posterior read from JSON.
    Evaluate(EvaluateArgs),
}

#[derive(Args, Serialize)]
struct Common {
    /// Config file (JSON object or `key = value` lines).
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct CompareBoundsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long)]
    preset: Option<String>,
    /// Monte-Carlo draws of the supremum.
    #[arg(long)]
    samples: Option<usize>,
    /// Thresholds on the grid.
    #[arg(long)]
    points: Option<usize>,
    /// Grid extent above the median, in units of sigma-tilde.
    #[arg(long)]
    span: Option<f64>,
}

#[derive(Args, Serialize)]
struct DeciderArgs {
    /// MC, AMC, AB or ABM.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    rounds: Option<usize>,
}

#[derive(Args, Serialize)]
struct RunSalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    decider: DeciderArgs,
    #[arg(long)]
    preset: Option<String>,
    /// Total posterior samples available to the run.
    #[arg(long)]
    budget: Option<u64>,
    /// Points per trajectory.
    #[arg(long)]
    m: Option<usize>,
    /// Candidate trajectories per acquisition.
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long)]
    max_retries: Option<usize>,
    #[arg(long)]
    initial_points: Option<usize>,
}

#[derive(Args, Serialize)]
struct CalibrateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    decider: DeciderArgs,
    /// bernoulli or gaussian.
    #[arg(long)]
    process: Option<String>,
    /// Unsafe probability (bernoulli) or Borell bound (gaussian).
    #[arg(long)]
    p_true: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    oracle_samples: Option<usize>,
}

#[derive(Args, Serialize)]
struct EvaluateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    decider: DeciderArgs,
    /// Posterior JSON with `mean` and `cov`.
    #[arg(long)]
    input: Option<PathBuf>,
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("SAFEGP_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("SAFEGP_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> CliResult<String> {
    configure_threads()?;
    let out = match cli.command {
        Command::CompareBounds(a) => {
            serde_json::to_string_pretty(&cmd_compare_bounds(&resolve(a.common.config.as_deref(), &a)?)?)
        }
        Command::RunSal(a) => serde_json::to_string_pretty(&cmd_run_sal(&resolve(a.common.config.as_deref(), &a)?)?),
        Command::Calibrate(a) => {
            serde_json::to_string_pretty(&cmd_calibrate(&resolve(a.common.config.as_deref(), &a)?)?)
        }
        Command::Evaluate(a) => serde_json::to_string_pretty(&cmd_evaluate(&resolve(a.common.config.as_deref(), &a)?)?),
    };
    out.map_err(|e| CliError::Io(e.to_string()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("safegp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
