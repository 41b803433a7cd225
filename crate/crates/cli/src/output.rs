use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

/// A CSV artifact with its header row.
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: Vec<&'static str>) -> Self {
        Self {
            name: name.into(),
            header,
            rows: Vec::new(),
        }
    }
}

/// What a command produced. `failure` is reported after the artifacts are
/// written, e.g. a minimization that did not converge.
pub struct Output {
    pub result: Value,
    pub tables: Vec<Table>,
    pub failure: Option<CliError>,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    library_version: &'a str,
    config_hash: String,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    timestamp: u64,
    config: &'a RunConfig,
    artifacts: Vec<String>,
    result: &'a Value,
}

pub fn config_hash(config: &RunConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("cannot write {}: {e}", path.display()))
}

fn write_table(dir: &Path, table: &Table) -> Result<String, CliError> {
    let file = format!("{}.csv", table.name);
    let path = dir.join(&file);
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_error(&path, e))?;
    w.write_record(&table.header).map_err(|e| io_error(&path, e))?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| io_error(&path, e))?;
    }
    w.flush().map_err(|e| io_error(&path, e))?;
    Ok(file)
}

/// Writes `<command>.json` and the CSV tables into `dir`, returning the
/// report text.
pub fn write_report(dir: &Path, command: &str, config: &RunConfig, out: &Output) -> Result<String, CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut artifacts = Vec::new();
    for t in &out.tables {
        artifacts.push(write_table(dir, t)?);
    }
    let report = Report {
        command,
        library_version: nonloc_core::VERSION,
        config_hash: config_hash(config),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        config,
        artifacts,
        result: &out.result,
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    let path = dir.join(format!("{command}.json"));
    fs::write(&path, &text).map_err(|e| io_error(&path, e))?;
    Ok(text)
}
