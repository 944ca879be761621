//! `latticeweak`: builds Hamiltonians, spectra, decay curves, circuits,
//! samples, resource tables, ensemble curves and widths from the command
//! line. Every artifact starts with a header carrying the tool version, a
//! hash of its inputs and the seed.

mod artifact;
mod commands;
mod config;
mod error;

use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult};

/// Environment variable capping the worker threads.
const THREADS_VAR: &str = "LATTICEWEAK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "latticeweak", version, about = "Lattice beta-decay simulation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a Hamiltonian piece as Pauli terms.
    Ham(commands::HamArgs),
    /// Tabulate single-site energy gaps (CSV).
    Spectrum(commands::SpectrumArgs),
    /// Decay probability against time (CSV).
    Evolve(commands::EvolveArgs),
    /// Emit a circuit in text form.
    Circuit(commands::CircuitArgs),
    /// Sample a circuit with optional post-selection (JSON).
    Sample(commands::SampleArgs),
    /// Per-step gate counts against lattice size (CSV).
    Resources(commands::ResourcesArgs),
    /// Random-ensemble persistence curves and fits (CSV).
    Ensemble(commands::EnsembleArgs),
    /// Leading-order decay widths (JSON).
    Widths(commands::WidthsArgs),
}

fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("{THREADS_VAR}: {e}")))
}

fn dispatch(cmd: &Command) -> CliResult<()> {
    use commands::*;
    let (text, out) = match cmd {
        Command::Ham(a) => (ham(a)?, &a.out),
        Command::Spectrum(a) => (spectrum(a)?, &a.out),
        Command::Evolve(a) => (evolve(a)?, &a.out),
        Command::Circuit(a) => (circuit(a)?, &a.out),
        Command::Sample(a) => (sample(a)?, &a.out),
        Command::Resources(a) => (resources(a)?, &a.out),
        Command::Ensemble(a) => (ensemble(a)?, &a.out),
        Command::Widths(a) => (widths(a)?, &a.out),
    };
    artifact::emit(out.as_deref().map(Path::new), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| dispatch(&cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
