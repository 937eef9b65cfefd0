//! Configuration, orchestration and persistence behind the `eplab` binary.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{
    cmd_lp_check, cmd_oracle, cmd_run, cmd_sweep_tau, LpCheckOptions, OracleRow, RunSummary,
    SweepReport, SweepRow,
};
pub use config::RunConfig;
pub use output::Manifest;

use thiserror::Error;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime violation: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
            _ => EXIT_FAILURE,
        }
    }
}
