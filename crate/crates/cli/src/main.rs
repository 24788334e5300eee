//! `opweigh`: balance, expand and weigh problem files from the command line.

mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command};

/// Failure categories, each with its own exit status.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or malformed input, or unwritable output.
    Input(String),
    /// A numerical error raised by the library.
    Numerical(opweigh::Error),
    /// `verify` ran but some check failed.
    Verification,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification => 1,
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl From<opweigh::Error> for Failure {
    fn from(e: opweigh::Error) -> Self {
        Failure::Numerical(e)
    }
}

impl From<opweigh::ProblemError> for Failure {
    fn from(e: opweigh::ProblemError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(format!("output: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Input(format!("output: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => output::solve(args),
        Command::Series(args) => output::series(args),
        Command::Weigh(args) => output::weigh(args),
        Command::Verify(args) => output::verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Input(msg) => eprintln!("error: {msg}"),
                Failure::Numerical(e) => eprintln!("numerical error: {e}"),
                Failure::Verification => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
