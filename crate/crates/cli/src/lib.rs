//! Scenario runner: reads a TOML scenario, runs one experiment and writes
//! CSV and summary files.
//!
//! Exit codes: 0 success, 2 invalid configuration or violated precondition,
//! 3 non-convergence or solver failure, 4 output not writable. A bound that
//! fails its check is a result, reported in `summary.txt` and `estimates.csv`.

pub mod config;
pub mod report;
pub mod run;

use thiserror::Error;

pub use config::{load_config, parse_config, ScenarioConfig};
pub use run::{run_scenario, Command, Outcome};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Validation(_) | CliError::Precondition(_) => 2,
            CliError::NonConvergence(_) | CliError::Solver(_) => 3,
            CliError::Output(_) => 4,
        }
    }
}

impl From<quasilin_core::solver::SolverError> for CliError {
    fn from(e: quasilin_core::solver::SolverError) -> Self {
        use quasilin_core::solver::SolverError;
        match e {
            SolverError::Precondition(m) => CliError::Precondition(m),
            SolverError::Estimate(e) => CliError::Precondition(e.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<quasilin_core::estimates::EstimateError> for CliError {
    fn from(e: quasilin_core::estimates::EstimateError) -> Self {
        CliError::Precondition(e.to_string())
    }
}
