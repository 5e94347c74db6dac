//! Library side of the `bml` command-line tool; `main` is a thin wrapper
//! around [`run_from_args`] so integration tests can drive the same paths.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;

use clap::Parser;

use crate::config::ConfigFile;
use crate::error::CliError;

/// Parses arguments, runs the command, and returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match cli::Cli::try_parse_from(args) {
        Ok(parsed) => parsed,
        Err(e) => {
            // Help and version are successes; anything else is a usage
            // error, which exits 1 by contract.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(parsed) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(parsed: cli::Cli) -> Result<(), CliError> {
    let cfg = match &parsed.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match parsed.command {
        cli::Command::Simulate(args) => commands::simulate::run(args, &cfg),
        cli::Command::Verify(args) => commands::verify::run(args, &cfg),
        cli::Command::Spectrum(args) => commands::spectrum::run(args, &cfg),
        cli::Command::Sweep(args) => commands::sweep::run(args, &cfg),
        cli::Command::Render(args) => commands::render::run(args, &cfg),
    }
}
