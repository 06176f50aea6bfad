//! Pipeline driver: data preparation, splitting, tokenizer training, model
//! pretraining and fine-tuning, generation, and the evaluation reports.
//!
//! Every command writes a run manifest (config digest, seeds, input and
//! output digests) beside its outputs, and all stochastic steps draw from
//! explicit seeds, so reruns reproduce byte-identical primary outputs.

pub mod commands;
pub mod config;
pub mod io;
pub mod logfmt;
pub mod manifest;
pub mod report;

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or missing/invalid input: exit code 1.
    Validation(String),
    /// Failure while running: exit code 2.
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "{msg}"),
            CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn validation(msg: impl Into<String>) -> CliError {
        CliError::Validation(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> CliError {
        CliError::Runtime(msg.into())
    }
}

pub fn io_runtime(context: &str, err: std::io::Error) -> CliError {
    CliError::Runtime(format!("{context}: {err}"))
}

/// Missing input files are validation errors that must name the path.
pub fn require_file(path: &std::path::Path) -> Result<(), CliError> {
    if !path.is_file() {
        return Err(CliError::Validation(format!(
            "input file not found: {}",
            path.display()
        )));
    }
    Ok(())
}
