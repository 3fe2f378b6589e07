//! Command implementations behind the `tfalg` binary.
//!
//! Each subcommand is a pure function from a resolved parameter struct to a
//! JSON-serializable report, so the same code paths drive the binary and the
//! test suites. All randomness is seeded and recorded in the output; repeated
//! runs with identical inputs produce byte-identical files.

pub mod commands;
pub mod config;
pub mod fixtures;

use tfalg::TfError;

/// Process exit codes: 2 parse/IO, 3 precondition, 4 resource.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Precondition(String),
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Resource(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Parse(m) | CliError::Precondition(m) | CliError::Resource(m) => m,
        }
    }
}

impl From<TfError> for CliError {
    fn from(err: TfError) -> Self {
        let text = err.to_string();
        match err {
            TfError::TermCapExceeded { .. }
            | TfError::GridCapExceeded { .. }
            | TfError::MaxIterations { .. }
            | TfError::NoConvergence { .. } => CliError::Resource(text),
            _ => CliError::Precondition(text),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Parse(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Parse(err.to_string())
    }
}
