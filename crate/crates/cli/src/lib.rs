//! File formats, configuration and commands behind the `disteer` binary.

pub mod commands;
pub mod config;
pub mod counts;
pub mod numfmt;
pub mod output;

use disteer_core::protocol::ProtocolError;
use disteer_core::selftest::SelftestError;
use disteer_core::witness::WitnessError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("schema: {0}")]
    Schema(String),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("solver failure: {0}")]
    Solver(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
}

impl CliError {
    /// Process exit code: 2 for input errors, 3 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(_) => 3,
            _ => 2,
        }
    }
}

impl From<SelftestError> for CliError {
    fn from(e: SelftestError) -> Self {
        match e {
            SelftestError::Solver(_) | SelftestError::Infeasible => CliError::Solver(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}
