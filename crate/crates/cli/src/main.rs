//! Batch front-end: prepare data, select a structure, sweep thresholds, fit,
//! simulate, compare methods and summarize.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vinelasso::Error;

use config::Overrides;

#[derive(Parser)]
#[command(name = "vinelasso", version, about = "Sparse R-vine selection with Lasso regularization paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write copula-scale and normal-score versions of the input.
    Prepare,
    /// Compute the equation ordering only.
    Order,
    /// Select the structure matrix and regularization-path matrix.
    Select,
    /// Fit one model per threshold in the grid.
    Sweep,
    /// Fit the model at the first threshold of the grid.
    Fit,
    /// Sample from a fitted model.
    Simulate,
    /// Lasso sweep against the Gaussian comparator and the greedy baseline.
    Compare,
    /// Summarize a comparison report.
    Report,
}

const USAGE: u8 = 1;
const DATA: u8 = 2;
const NUMERIC: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => USAGE,
        Error::Cell { source, .. } => exit_code(source),
        Error::Contract(_) => DATA,
        e if e.is_data_error() => DATA,
        _ => NUMERIC,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match cli.overrides.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if let Some(t) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: thread pool already set: {e}");
        }
    }
    let result = commands::write_resolved(&cfg).and_then(|_| match cli.command {
        Command::Prepare => commands::prepare(&cfg),
        Command::Order => commands::order(&cfg),
        Command::Select => commands::select(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Fit => commands::fit(&cfg),
        Command::Simulate => commands::simulate(&cfg),
        Command::Compare => commands::compare_cmd(&cfg),
        Command::Report => commands::report(&cfg),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
