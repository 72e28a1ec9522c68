//! `subconc`: bound sweeps, sandwich simulations, sharpness runs, oracle
//! suites and sphere nets.
//!
//! Exit codes: 0 success, 1 a checked inequality failed, 2 bad
//! configuration or I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod svg;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::config(format!("i/o: {e}"))
    }
}

#[derive(Parser)]
#[command(name = "subconc", version, about = "Concentration bounds under sublinear expectations")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// TOML config file; flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory [default: subconc-out]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Azuma, Bernstein and dimension-free bounds over a t grid
    Bounds(commands::BoundsArgs),
    /// Monte Carlo tail estimates sandwiched between the bounds
    Simulate(commands::SimulateArgs),
    /// Monte Carlo tails at t = sigma/(4 sqrt n) against the lower bound
    Sharpness(commands::SharpnessArgs),
    /// Exact checks on finite sublinear-expectation spaces
    Oracle(commands::OracleArgs),
    /// Build and verify a 1/2-net of the unit sphere
    Net(commands::NetArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config::FileConfig::load(cli.common.config.as_deref()).and_then(|file| match cli.command {
        Command::Bounds(a) => commands::bounds(&cli.common, &file, a),
        Command::Simulate(a) => commands::simulate(&cli.common, &file, a),
        Command::Sharpness(a) => commands::sharpness(&cli.common, &file, a),
        Command::Oracle(a) => commands::oracle(&cli.common, &file, a),
        Command::Net(a) => commands::net(&cli.common, &file, a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
