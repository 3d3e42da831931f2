//! `pugraph` command-line front end.

mod args;
mod commands;
mod error;
mod output;
mod reproduce;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::Cli;
use error::CliError;
use output::Run;

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("PUGRAPH_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::bad_input(format!("PUGRAPH_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::numerical(e.to_string()))
}

fn report(err: &CliError) -> ExitCode {
    eprintln!("{}", serde_json::to_string(err).expect("error serialises"));
    ExitCode::from(err.code)
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return report(&CliError::bad_input(e.to_string().trim_end()));
        }
    };
    if let Err(e) = configure_threads() {
        return report(&e);
    }

    let mut run = Run::new(cli.out.clone(), commands::name(&cli.command));
    let outcome = commands::dispatch(&cli.command, &mut run);
    if let Err(e) = run.finish(started.elapsed()) {
        return report(&e);
    }
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
