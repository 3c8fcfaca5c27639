//! `dynloc`: run quantum-walk simulations, scans and data reductions from a
//! JSON config.

// Guards are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;

use commands::Run;
use config::Loaded;
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "dynloc",
    version,
    about = "Dynamic localization of quantum walks on curved waveguide lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for stochastic steps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Probability distributions at each scan length.
    Simulate,
    /// Variance against length, with straight reference and fits.
    VarianceScan,
    /// Effective coupling and return probability over bending amplitudes.
    LocalizationScan,
    /// Piecewise curved/straight arrays.
    Memory,
    /// g² values and the Cauchy-Schwarz test.
    Gstats,
    /// Camera frames to probabilities and variances with error bars.
    Ingest,
}

fn execute(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("--threads", "must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config("--threads", e.to_string()))?;
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("--config", "a config file is required"))?;
    let loaded = Loaded::read(path)?;
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::io(&cli.out, e))?;
    let run = Run {
        loaded,
        out: cli.out.clone(),
        seed: cli.seed,
    };
    match cli.command {
        Command::Simulate => commands::simulate(&run),
        Command::VarianceScan => commands::variance_scan(&run),
        Command::LocalizationScan => commands::localization_scan(&run),
        Command::Memory => commands::memory(&run),
        Command::Gstats => commands::gstats(&run),
        Command::Ingest => commands::ingest(&run),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
