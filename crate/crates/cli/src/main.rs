//! `hls`: constant tables, quotient evaluation, extremal search and
//! concentration-compactness classification on the Heisenberg group.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod classify;
mod config;
mod constants;
mod error;
mod evaluate;
mod maximize;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "hls",
    version,
    about = "Hardy-Littlewood-Sobolev numerics on the Heisenberg group"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sharp constants, bounds and their comparisons (JSON).
    Constants(RunConfig),
    /// Energy, norms and quotient of a preset or a grid file (JSON, CSV ladder).
    Evaluate(RunConfig),
    /// Search for an extremal profile (JSON summary, CSV trace).
    Maximize(RunConfig),
    /// Vanishing / compactness / dichotomy verdict for a measure sequence (JSON).
    Classify(RunConfig),
}

type Runner = fn(&RunConfig) -> Result<Vec<output::Document>, CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (runner, cfg): (Runner, RunConfig) = match cli.command {
        Command::Constants(c) => (constants::run, c),
        Command::Evaluate(c) => (evaluate::run, c),
        Command::Maximize(c) => (maximize::run, c),
        Command::Classify(c) => (classify::run, c),
    };
    let cfg = cfg.resolve()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers()?)
        .build_global()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    output::emit(runner(&cfg)?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
