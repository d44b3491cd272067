//! Batch front end for the flow-category toolkit.
//!
//! Every command loads one JSON document, runs its checks and returns a
//! pretty-printed JSON report. Keys are sorted, so reports are byte-stable.

mod commands;
pub mod schema;

use std::path::PathBuf;

use thiserror::Error;

pub use commands::run;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Cohomology,
    Ss,
    Morphism,
    Gysin,
    Hpl,
    Demo,
}

#[derive(Debug, Clone)]
pub struct JobConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub demo: Option<String>,
    pub page: Option<i64>,
    pub k: i64,
    pub trivial: bool,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub verbose_signs: bool,
    pub seed: u64,
}

impl JobConfig {
    pub fn new(command: Command) -> Self {
        JobConfig {
            command,
            input: None,
            demo: None,
            page: None,
            k: 1,
            trivial: false,
            tol: 1e-6,
            out: None,
            verbose_signs: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    /// Pretty JSON, newline terminated.
    pub report: String,
    /// Sign-trace lines, filled only with `verbose_signs`.
    pub log: Vec<String>,
    /// Model document emitted by a demo.
    pub model: Option<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("engine: {0}")]
    Engine(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) | CliError::Io { .. } => 2,
            CliError::Engine(_) | CliError::Compute(_) => 1,
        }
    }
}
