//! `popbench` command-line interface.
//!
//! Exit codes: 0 success, 1 input error (including usage errors), 2
//! internal invariant violation.

mod args;
mod commands;
mod config;
mod manifest;

use std::fmt;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use config::RunConfig;

/// An internal invariant failed; maps to exit code 2.
#[derive(Debug)]
pub struct Invariant(pub String);

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invariant violated: {}", self.0)
    }
}

impl std::error::Error for Invariant {}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            anyhow::bail!("--workers must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Invariant(format!("thread pool: {e}")))?;
    }
    let mut config = RunConfig::load(cli.config.as_deref())?;
    config.apply_seed(cli.seed);
    match &cli.command {
        Command::Ingest(a) => commands::ingest(a, config),
        Command::Features(a) => commands::features(a, config),
        Command::Label(a) => commands::label(a, config),
        Command::Train(a) => commands::train(a, config),
        Command::Eval(a) => commands::eval(a, config),
        Command::Rank(a) => commands::rank_cmd(a, config),
        Command::Ablate(a) => commands::ablate(a, config),
        Command::Synth(a) => commands::synth(a, config),
        Command::ReproTables(a) => commands::repro_tables(a, config),
    }
}

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|info| {
        eprintln!("internal error: {info}");
        std::process::exit(2);
    }));
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<Invariant>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
