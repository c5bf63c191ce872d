//! Command-line harness for `relax2d`: envelope tables, lamination runs,
//! finite element runs, the method comparison table and 1-D plot data.

pub mod commands;
pub mod spec;
pub mod table;

use std::path::PathBuf;

use thiserror::Error;

pub use commands::{
    cmd_compare, cmd_envelope, cmd_fem, cmd_plotdata, cmd_roc, run, ComparisonRow, Domain, Method,
};
pub use spec::{load_config_text, Command, RunSpec};
pub use table::Table;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("resource limit: {0}")]
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Resource(_) => 4,
        }
    }
}

impl From<relax2d::Error> for CliError {
    fn from(e: relax2d::Error) -> Self {
        use relax2d::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidInput(_) | E::Json(_) => CliError::Config(msg),
            E::Domain(_) | E::NonFiniteEnergy { .. } | E::CorruptTree(_) => CliError::Numerical(msg),
            E::MemoryBudget { .. } | E::Io(_) => CliError::Resource(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Resource(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Resource(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Resource(e.to_string())
    }
}

/// Result of a subcommand that got far enough to write artifacts. A
/// `failure` still means a nonzero exit.
#[derive(Debug)]
pub struct Outcome {
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
    pub failure: Option<CliError>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, CliError::exit_code)
    }
}
