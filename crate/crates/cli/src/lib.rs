//! The `logsp` batch front end: config loading and the five subcommands.

pub mod commands;
pub mod config;

use std::process::ExitCode;

pub use commands::{check_potential, compare, scan, solve, verify, ScanArgs};
pub use config::{Run, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or configuration: exit 1.
    #[error("config error: {0}")]
    Config(String),
    /// A computation that ran but did not reach its goal: exit 2.
    #[error("{0}")]
    Failed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Outcome of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Non-convergence, a failed check, or a non-positive margin.
    Negative,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Failed(_) => 2,
        }
    }
}

impl From<logsp::Error> for CliError {
    fn from(e: logsp::Error) -> Self {
        use logsp::Error as E;
        match e {
            E::NotConverged(_) | E::NoMaximizer | E::BracketNotFound { .. } | E::Unresolved { .. } | E::ZeroField => {
                CliError::Failed(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub fn exit_code(result: Result<Status, CliError>) -> ExitCode {
    match result {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Negative) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
