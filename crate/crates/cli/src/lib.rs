//! Front end for the `tempoblock` binary: suite configuration, the `plan`,
//! `simulate`, `validate` and `report` commands, and report rendering.
//!
//! Every command is a plain function over a [`Context`] so tests can drive
//! them without spawning the binary. Nothing here reads the clock, so the
//! same inputs always produce the same bytes.

mod commands;
mod parity;
mod report;
mod suite;

pub use commands::{cmd_plan, cmd_simulate, Context};
pub use parity::{cmd_validate, ParityReport, ParityRow};
pub use report::{
    read_report, render_table, write_report, Check, OracleVerdict, Report, RooflinePoint, Simulation, StencilRecord,
    Verdict,
};
pub use suite::{desk_domain, SuiteConfig, SuiteEntry, DEFAULT_MAX_CELLS};

use tempoblock::engine::EngineError;
use tempoblock::model::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{stencil}: {source}")]
    Precondition { stencil: String, source: EngineError },
    #[error("{stencil}: planner found no configuration: {source}")]
    Plan { stencil: String, source: ModelError },
    #[error("{stencil}: output differs from the reference at cell {index} (engine {got}, reference {want})")]
    OracleMismatch {
        stencil: String,
        index: usize,
        got: f64,
        want: f64,
    },
    #[error("{stencil}: {quantity} check failed (measured {measured}, expected {expected})")]
    CheckFailed {
        stencil: String,
        quantity: String,
        measured: f64,
        expected: f64,
    },
    #[error("{0} parity row(s) failed")]
    Parity(usize),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    /// 0 success, 1 parity or oracle failure, 2 configuration error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::OracleMismatch { .. } | CliError::CheckFailed { .. } | CliError::Parity(_) => 1,
            _ => 2,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn io_error(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}
