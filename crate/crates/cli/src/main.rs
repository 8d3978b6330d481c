mod args;
mod commands;
mod config;
mod io;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::{resolve, usage, UsageError};

/// Optional worker-thread count for the rayon pool.
const THREADS_ENV: &str = "QFLUCT_THREADS";

fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        usage(format!(
            "{THREADS_ENV} must be a positive integer, got '{value}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    configure_threads()?;
    let config = cli.config.as_deref().map(config::load).transpose()?;
    let config = config.as_ref();
    match cli.command {
        Command::Simulate(a) => commands::simulate(resolve(&a, config)?),
        Command::Scan(a) => commands::scan(resolve(&a, config)?),
        Command::Mitigate(a) => commands::mitigate(resolve(&a, config)?),
        Command::Validate(a) => commands::validate(resolve(&a, config)?),
        Command::Threshold(a) => commands::threshold(resolve(&a, config)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
