//! Command-line front end: configuration, dispatch, and the JSON-lines journal.

use std::path::PathBuf;

use thiserror::Error;

pub mod config;
pub mod report;
pub mod run;
pub mod theta;

pub use config::{load_config, Command, ConfigFile, Params, RunConfig};
pub use report::{read_journal, write_report, Check, Clock, ReportRecord, SCHEMA_VERSION};
pub use run::{execute, run};
pub use theta::ThetaSpec;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown subcommand {0:?}")]
    UnknownCommand(String),
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("key {key:?} is not used by {command}")]
    Irrelevant { key: String, command: &'static str },
    #[error("missing required key {0:?}")]
    Missing(&'static str),
    #[error("bad value {value:?} for {key}: {msg}")]
    Value { key: String, value: String, msg: String },
    #[error("malformed theta spec, field {field}: {msg}")]
    Theta { field: String, msg: String },
    #[error("config line {line}: {msg}")]
    ConfigSyntax { line: usize, msg: String },
    #[error("conflicting entries for {key:?}: {first:?} and {second:?}")]
    Conflict { key: String, first: String, second: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Journal { path: PathBuf, line: usize, msg: String },
}

impl CliError {
    /// Usage and I/O errors exit with 1; numerical failures are reported in the record.
    pub fn exit_code(&self) -> i32 {
        1
    }
}
