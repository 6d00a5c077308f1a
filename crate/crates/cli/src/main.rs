#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod failure;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use failure::{ExitStatus, Failure, Outcome};

const THREADS_VAR: &str = "QDCASCADE_THREADS";

fn configure_threads() -> Outcome {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("{THREADS_VAR} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("{THREADS_VAR}: {e}")))
}

fn dispatch(command: Command) -> Outcome<Option<String>> {
    configure_threads()?;
    Ok(match command {
        Command::Simulate(a) => commands::simulate(a).map(|_| None)?,
        Command::Tomography(a) => commands::tomography(a).map(|_| None)?,
        Command::SteadyState(a) => Some(commands::steady_state(a)?),
        Command::Lifetimes(a) => Some(commands::lifetimes(a)?),
        Command::Mc(a) => Some(commands::mc(a)?),
        Command::Correlate(a) => commands::correlate_tags(a).map(|_| None)?,
        Command::Fit(a) => Some(commands::fit_data(a)?),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(ExitStatus::Usage as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(text) => {
            if let Some(text) = text {
                print!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message.lines().next().unwrap_or_default());
            ExitCode::from(f.status as u8)
        }
    }
}
