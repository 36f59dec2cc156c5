//! Report envelopes and file output.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::{ExperimentConfig, Task};
use crate::error::CliResult;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    tool_version: &'static str,
    task: Task,
    config_hash: &'a str,
    seed: u64,
    result: &'a Value,
}

/// A finished run: the report and any CSV exports, not yet written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub task: Task,
    pub config_hash: String,
    pub seed: u64,
    pub result: Value,
    pub files: Vec<(String, Vec<u8>)>,
}

impl RunOutput {
    pub fn new(task: Task, cfg: &ExperimentConfig) -> Self {
        RunOutput { task, config_hash: cfg.hash(), seed: cfg.seed, result: Value::Null, files: Vec::new() }
    }

    pub fn set_result<T: Serialize>(&mut self, result: &T) {
        self.result = serde_json::to_value(result).expect("report serialises");
    }

    pub fn add_file(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    /// The pretty-printed JSON report.
    pub fn report_json(&self) -> String {
        let env = Envelope {
            tool: "conecd",
            tool_version: TOOL_VERSION,
            task: self.task,
            config_hash: &self.config_hash,
            seed: self.seed,
            result: &self.result,
        };
        let mut s = serde_json::to_string_pretty(&env).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn report_name(&self) -> String {
        format!("{}.json", self.task.name())
    }

    /// Writes `<task>.json` and the CSV exports into `dir`.
    pub fn write(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::with_capacity(self.files.len() + 1);
        let report = dir.join(self.report_name());
        fs::write(&report, self.report_json())?;
        paths.push(report);
        for (name, bytes) in &self.files {
            let p = dir.join(name);
            fs::write(&p, bytes)?;
            paths.push(p);
        }
        Ok(paths)
    }
}

pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| std::io::Error::other(e.to_string()).into())
}
