//! `fredk2`: determinant invariants of loop pairs, convergence sweeps and
//! group homology checks, reported as JSON, CSV or text.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical failure, 4 invariant
//! violation (including disagreement beyond tolerance).

mod commands;
mod config;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fredk2::{Error, ErrorKind};
use serde::Serialize;

use crate::commands::SymbolArgs;
use crate::config::RunConfig;
use crate::report::{Report, Table};

#[derive(Debug, Parser)]
#[command(name = "fredk2", version, about = "Fredholm determinant invariants of Steinberg symbols of loops")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    config: RunConfig,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Invariant of the symbol {alpha, beta} by each selected method.
    Symbol {
        alpha: PathBuf,
        beta: PathBuf,
        /// Write the shift representative operator as JSON.
        #[arg(long)]
        dump_operator: Option<PathBuf>,
    },
    /// Operator value over a list of windows against the closed form.
    Converge {
        alpha: PathBuf,
        beta: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [32, 64, 128, 256])]
        windows: Vec<usize>,
    },
    /// Sampled 2-cycle comparison on every surjection of a catalog.
    Homology {
        /// JSON array of surjections; the built-in catalog when omitted.
        catalog: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Quick end-to-end check of known values.
    Selftest,
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Input => 2,
        ErrorKind::Numerical => 3,
        ErrorKind::Invariant => 4,
    }
}

fn emit<B: Serialize + Table>(report: Report<B>, config: &RunConfig) -> ExitCode {
    let text = report.render(config.format);
    let mut out = std::io::stdout().lock();
    if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
        return ExitCode::from(2);
    }
    if report.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = &cli.config;
    let outcome = match &cli.command {
        Command::Symbol { alpha, beta, dump_operator } => {
            let args = SymbolArgs { alpha, beta, dump_operator: dump_operator.as_deref() };
            commands::symbol(args, config).map(|r| emit(r, config))
        }
        Command::Converge { alpha, beta, windows } => commands::converge(alpha, beta, windows, config).map(|r| emit(r, config)),
        Command::Homology { catalog, samples } => {
            commands::homology_run(catalog.as_deref(), *samples, config).map(|r| emit(r, config))
        }
        Command::Selftest => commands::selftest(config).map(|r| emit(r, config)),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("fredk2: {e}");
        ExitCode::from(exit_code(&e))
    })
}
