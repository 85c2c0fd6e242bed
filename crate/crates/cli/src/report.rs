//! Journal records: one self-describing JSON object per line.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Wall-clock data; the only part of a record that differs between identical runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clock {
    /// RFC 3339, UTC.
    pub timestamp: String,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub schema_version: u32,
    pub clock: Clock,
    pub config_hash: String,
    pub op: String,
    /// Identity the run checks.
    pub anchor: String,
    /// Resolved parameters.
    pub inputs: Value,
    pub outputs: Value,
    pub residuals: Value,
    pub verdicts: Vec<Check>,
    pub pass: bool,
}

impl ReportRecord {
    /// The record with the clock removed, for determinism comparisons.
    pub fn without_clock(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("record serializes");
        v.as_object_mut().expect("object").remove("clock");
        v
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            2
        }
    }
}

/// Appends `record` as one JSON line. The line is written with a single `write_all`
/// on an append-mode handle.
pub fn write_report(record: &ReportRecord, sink: &Path) -> Result<(), CliError> {
    let io = |e| CliError::Io {
        path: sink.to_path_buf(),
        source: e,
    };
    let mut line = serde_json::to_string(record).expect("record serializes");
    line.push('\n');
    let mut f = OpenOptions::new().create(true).append(true).open(sink).map_err(io)?;
    f.write_all(line.as_bytes()).map_err(io)?;
    f.flush().map_err(io)
}

/// Reads every record of a journal.
pub fn read_journal(path: &Path) -> Result<Vec<ReportRecord>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    text.lines()
        .enumerate()
        .map(|(k, l)| {
            serde_json::from_str(l).map_err(|e| CliError::Journal {
                path: path.to_path_buf(),
                line: k + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}
