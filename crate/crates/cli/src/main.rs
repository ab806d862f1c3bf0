//! `henon`: perturbation series, complex-dilation resonances and
//! distributional Borel sums for the quantum Hénon–Heiles oscillator.
//!
//! Exit status: 0 when every numerical step and check passes, 1 on a
//! numerical failure, 2 on a usage, configuration or I/O error. The worker
//! thread count comes from `HENON_THREADS`.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand};

use config::{merge, ResonanceArgs, ResumArgs, RspeArgs, RunConfig, VerifyArgs};

pub const THREADS_ENV: &str = "HENON_THREADS";

#[derive(Parser, Debug)]
#[command(name = "henon", version = output::BUILD_ID, about)]
struct Cli {
    /// JSON file with the same keys as the subcommand flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact Rayleigh-Schrödinger coefficients.
    Rspe(RspeArgs),
    /// Converged resonance energies on a coupling grid.
    Resonance(ResonanceArgs),
    /// Distributional Borel-Leroy sums of a coefficient file.
    Resum(ResumArgs),
    /// Cross-checks between the series, the resonance and the sum.
    Verify(VerifyArgs),
}

pub enum Failure {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
}

impl Failure {
    pub fn usage(e: impl Into<anyhow::Error>) -> Self {
        Failure::Usage(e.into())
    }

    pub fn numerical(e: impl Into<anyhow::Error>) -> Self {
        Failure::Numerical(e.into())
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            henon_core::par::configure_threads(n);
            Ok(())
        }
        _ => Err(Failure::usage(anyhow!("{THREADS_ENV} must be a positive integer, got '{raw}'"))),
    }
}

fn resolve(cli: Cli) -> anyhow::Result<RunConfig> {
    let file = cli.config.as_deref();
    match cli.command {
        Command::Rspe(a) => merge(a, file, "rspe")?.resolve(),
        Command::Resonance(a) => merge(a, file, "resonance")?.resolve(),
        Command::Resum(a) => merge(a, file, "resum")?.resolve(),
        Command::Verify(a) => merge(a, file, "verify")?.resolve(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let status = configure_threads()
        .and_then(|_| resolve(cli).map_err(Failure::Usage))
        .and_then(|config| commands::run(&config));
    match status {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
