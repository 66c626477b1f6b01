//! Experiment output: named CSV tables plus machine-checked pass/fail flags.
//!
//! Reports must be byte-reproducible for a fixed config, so every float is
//! formatted through [`fmt_float`] at insertion time and row order follows
//! the configuration order, never the completion order of worker threads.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;

use crate::config::Scenario;

/// Fixed-width scientific notation used for every float the harness emits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.12e}")
}

/// One CSV table: a name (becomes the file name), a header, and pre-formatted
/// rows.
#[derive(Clone, Debug)]
pub struct Table {
    name: String,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    /// Panics when the cell count does not match the header; table shapes are
    /// fixed at compile time by the scenario code, so a mismatch is a bug.
    pub fn push(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.columns.len(), "row shape mismatch in table {}", self.name);
        self.rows.push(cells);
    }

    fn write_to(&self, path: &Path) -> anyhow::Result<()> {
        let mut writer = csv::Writer::from_path(path)
            .with_context(|| format!("cannot create {}", path.display()))?;
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// A single machine-checked expectation.
#[derive(Clone, Debug)]
pub struct Flag {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Everything a scenario run produces.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub scenario: Scenario,
    pub tables: Vec<Table>,
    pub flags: Vec<Flag>,
    pub wall_time: Duration,
}

impl ExperimentReport {
    pub fn new(scenario: Scenario) -> Self {
        Self { scenario, tables: Vec::new(), flags: Vec::new(), wall_time: Duration::ZERO }
    }

    pub fn flag(&mut self, name: &str, passed: bool, detail: String) {
        self.flags.push(Flag { name: name.to_string(), passed, detail });
    }

    /// True when every declared expectation held.
    pub fn passed(&self) -> bool {
        self.flags.iter().all(|f| f.passed)
    }

    pub fn find_flag(&self, name: &str) -> Option<&Flag> {
        self.flags.iter().find(|f| f.name == name)
    }

    pub fn find_table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name() == name)
    }

    /// Writes `<scenario>_<table>.csv` for each table; returns the paths.
    pub fn write_csv(&self, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))?;
        let mut paths = Vec::with_capacity(self.tables.len());
        for table in &self.tables {
            let path = dir.join(format!("{}_{}.csv", self.scenario.name(), table.name()));
            table.write_to(&path)?;
            paths.push(path);
        }
        Ok(paths)
    }

    /// Human-readable summary: one line per flag, then the verdict.
    pub fn summary(&self) -> String {
        let mut out = format!("scenario: {}\n", self.scenario.name());
        for flag in &self.flags {
            let status = if flag.passed { "pass" } else { "FAIL" };
            out.push_str(&format!("[{status}] {}: {}\n", flag.name, flag.detail));
        }
        out.push_str(&format!(
            "result: {} ({} flags, {:.1} s)\n",
            if self.passed() { "pass" } else { "FAIL" },
            self.flags.len(),
            self.wall_time.as_secs_f64()
        ));
        out
    }
}
