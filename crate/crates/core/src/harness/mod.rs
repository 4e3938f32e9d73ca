//! Scenario runner: builds the right inverse described by a scenario file,
//! measures residuals on a sample cloud and evaluates the identity rows.

mod report;
mod scenario;
mod suite;

use std::path::Path;

use thiserror::Error;

use crate::pipeline::PipelineError;

pub use report::{emit, CheckRow, ResidualReport, Stats, Timings};
pub use scenario::{Controls, DescriptorRef, OutputFormat, OutputSpec, ResolvedScenario, Scenario};
pub use suite::{evaluate, Mode, CLOSED_FORM_TOL, EXACT_TOL, EXTENSION_TOL, IDEAL_TOL, STILDE_TOL};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {message}")]
    Config { message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

impl HarnessError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => EXIT_CONFIG,
            _ => EXIT_FAIL,
        }
    }
}

/// Loads, validates and runs a scenario file.
pub fn run_scenario(path: &Path) -> Result<(ResidualReport, Timings), HarnessError> {
    let resolved = Scenario::load(path)?.resolve()?;
    Ok(evaluate(&resolved, Mode::Run))
}

/// Identity rows only, for `rinverse verify`.
pub fn identity_suite(path: &Path) -> Result<ResidualReport, HarnessError> {
    let resolved = Scenario::load(path)?.resolve()?;
    Ok(evaluate(&resolved, Mode::Verify).0)
}

/// Runs an in-memory scenario.
pub fn run_in_memory(scenario: &Scenario, mode: Mode) -> Result<(ResidualReport, Timings), HarnessError> {
    let resolved = scenario.resolve()?;
    Ok(evaluate(&resolved, mode))
}
