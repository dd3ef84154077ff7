//! `superl`: experiments for the super-Liouville system from the command line.
//!
//! Exit codes: 0 success, 1 computation failure, 2 usage or configuration error.

mod commands;
mod output;
mod plot;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
}

impl From<superl_core::Error> for CliError {
    fn from(e: superl_core::Error) -> Self {
        use superl_core::Error as E;
        match e {
            E::LinearSolve { .. } | E::SingularJacobian { .. } | E::Io(_) => CliError::Compute(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "superl", version, about = "Super-Liouville system: exact bubbles, solver, blow-up diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Flat key=value file; command-line flags take precedence
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Artifact directory; a manifest.json is written there
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also write SVG plots into the artifact directory
    #[arg(long)]
    pub plot: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Residuals and energies of a closed-form bubble
    VerifyExact(commands::VerifyExact),
    /// Damped Newton solve of the coupled system
    Solve(commands::Solve),
    /// Pohozaev constants at several radii
    Pohozaev(commands::Pohozaev),
    /// Energy-identity audit of a bubble family
    Blowup(commands::Blowup),
    /// Brezis-Merle and singularity-type classification
    Classify(commands::Classify),
    /// Per-index diagnostics table for a family
    Report(commands::Report),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::VerifyExact(a) => commands::verify_exact(a),
        Command::Solve(a) => commands::solve(a),
        Command::Pohozaev(a) => commands::pohozaev(a),
        Command::Blowup(a) => commands::blowup(a),
        Command::Classify(a) => commands::classify(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            eprintln!("run `superl --help` for usage");
            ExitCode::from(2)
        }
        Err(CliError::Compute(m)) => {
            eprintln!("computation failed: {m}");
            ExitCode::from(1)
        }
    }
}
