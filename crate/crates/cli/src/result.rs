use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use teichkit_core::domains::NormReport;

use crate::config::ExperimentConfig;
use crate::error::Result;

pub const SCHEMA: u32 = 1;

/// A named CSV table emitted next to the JSON result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Formats a float for CSV; non-finite values become `NA`.
pub fn cell(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        "NA".to_string()
    }
}

/// The stage at which a run stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema: u32,
    pub command: ExperimentConfig,
    pub reports: BTreeMap<String, NormReport>,
    pub verdicts: BTreeMap<String, bool>,
    pub data: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<StageError>,
    #[serde(skip)]
    pub tables: BTreeMap<String, Table>,
    pub wall_time: f64,
    pub versions: BTreeMap<String, String>,
}

impl ExperimentResult {
    pub fn new(command: ExperimentConfig) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert(
            "teichkit".to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        );
        ExperimentResult {
            schema: SCHEMA,
            command,
            reports: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            data: BTreeMap::new(),
            error: None,
            tables: BTreeMap::new(),
            wall_time: 0.0,
            versions,
        }
    }

    /// No stage failed and every verdict holds.
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.verdicts.values().all(|&v| v)
    }

    pub fn report(&mut self, name: impl Into<String>, r: NormReport) {
        self.reports.insert(name.into(), r);
    }

    pub fn verdict(&mut self, name: impl Into<String>, v: bool) {
        self.verdicts.insert(name.into(), v);
    }

    pub fn datum(&mut self, name: impl Into<String>, v: impl Serialize) {
        let v = serde_json::to_value(v).unwrap_or(serde_json::Value::Null);
        self.data.insert(name.into(), v);
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes the JSON result and one `<stem>.<table>.csv` per table.
    pub fn write(&self, path: &Path) -> Result<Vec<PathBuf>> {
        std::fs::write(path, self.to_json()?)?;
        let mut written = vec![path.to_path_buf()];
        for (name, t) in &self.tables {
            let p = table_path(path, name);
            t.write(&p)?;
            written.push(p);
        }
        Ok(written)
    }
}

pub fn table_path(out: &Path, name: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "result".into());
    out.with_file_name(format!("{stem}.{name}.csv"))
}
