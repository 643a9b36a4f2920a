//! Command-line surface for the parity-regression toolkit.
//!
//! Four subcommands: `estimate` runs the full estimator table on a CSV of
//! weekly quotes, `simulate` reproduces the Monte Carlo size/power study
//! from a config file, `roll` produces rolling-window estimates with 95%
//! bands, and `factorize` reports the overlap MA polynomial and its
//! inverse filter. Every command writes a `manifest.json` capturing the
//! exact configuration, input hashes, and seed of the run.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical
//! infeasibility.

mod commands;
mod config;
mod manifest;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "uipdyn", version, about = "Dynamic-regression tests of uncovered interest parity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the parity regression on weekly spot/forward quotes
    Estimate(EstimateArgs),
    /// Run the Monte Carlo size/power experiment from a config file
    Simulate(SimulateArgs),
    /// Rolling-window estimates with 95% confidence bands
    Roll(RollArgs),
    /// Report the overlap MA polynomial, its roots, and the AR filter
    Factorize(FactorizeArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with date, spot, and forward columns
    #[arg(long)]
    data: PathBuf,
    /// Regression design: fama (spot return on premium, null beta = 1)
    /// or hh (forecast error on its lag, null beta = 0)
    #[arg(long, default_value = "hh")]
    design: String,
    /// Contract horizon in sampling periods
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Name of the date column
    #[arg(long, default_value = "date")]
    date_col: String,
    /// Name of the spot column
    #[arg(long, default_value = "spot")]
    spot_col: String,
    /// Name of the forward column
    #[arg(long, default_value = "forward")]
    forward_col: String,
    /// Business days covered by the forward contract
    /// (defaults to 5k + 2, the weekly 30-day convention at k = 4)
    #[arg(long)]
    contract_days: Option<u32>,
    /// Business days per sampling period
    #[arg(long, default_value_t = 5)]
    days_per_period: u32,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated estimator rows
    #[arg(long, default_value = "ols,hh,nw,andrews,kv,ewc,dynreg,rdynreg")]
    methods: String,
    #[arg(long, default_value = "uipdyn_out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// key=value configuration file (unknown keys are rejected)
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "uipdyn_out")]
    out_dir: PathBuf,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RollArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Window length in observations (260 weeks = 5 years)
    #[arg(long, default_value_t = 260)]
    window: usize,
    /// Window step in observations
    #[arg(long, default_value_t = 1)]
    step: usize,
    /// Comma-separated estimators: ols, dynreg, rdynreg
    #[arg(long, default_value = "ols,rdynreg")]
    estimators: String,
    #[arg(long, default_value = "uipdyn_out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct FactorizeArgs {
    #[arg(long, default_value_t = 22)]
    contract_days: u32,
    #[arg(long, default_value_t = 5)]
    days_per_period: u32,
    #[arg(long, default_value = "uipdyn_out")]
    out_dir: PathBuf,
}

/// Error with the process exit code it maps to.
pub struct AppError {
    pub code: u8,
    pub message: String,
}

impl AppError {
    pub fn usage(message: impl Into<String>) -> Self {
        AppError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<uipdyn::Error> for AppError {
    fn from(e: uipdyn::Error) -> Self {
        use uipdyn::Error::*;
        let code = match &e {
            InvalidConfig(_) => 2,
            Io(_) | Csv(_) | MalformedRow { .. } | NonPositivePrice { .. } | DuplicateDate(_)
            | EmptyInput | MissingColumn(_) | TooFewObservations { .. }
            | WindowTooLarge { .. } | SeriesTooShort { .. } | MismatchedSamples { .. } => 3,
            DegenerateRegressor | RankDeficient { .. } | ZeroStandardError
            | NonInvertible { .. } | InfeasibleAutocorrelation { .. }
            | UnitRootLongRun { .. } => 4,
        };
        AppError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError {
            code: 3,
            message: format!("i/o error: {e}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => commands::estimate(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Roll(args) => commands::roll(args),
        Command::Factorize(args) => commands::factorize(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
