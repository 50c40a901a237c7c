//! Command-line experiment runner.

mod cache;
mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ep_spectral::Error;

#[derive(Parser)]
#[command(
    name = "ep-spectral",
    version,
    about = "Spectral Boltzmann solver with an equilibrium-preserving scheme"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a kernel table and write it to a cache file.
    BuildKernel {
        #[arg(long)]
        config: PathBuf,
        /// Cache file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate one initial condition; writes a CSV and a JSON summary next to it.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Diagnostics CSV; the summary goes to the same path with extension `.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Consistency and solution error ladder over several orders.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        /// Error table CSV; the summary goes to the same path with extension `.json`.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure classes, each with its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Assertion(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Assertion(_) => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Quadrature { .. } | Error::Overflow | Error::BlowUp { .. } | Error::NonPhysical(_) => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::BuildKernel { config, out } => commands::build_kernel(config, out),
        Command::Run { config, out } => commands::run(config, out),
        Command::Convergence { config, out } => commands::convergence(config, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
