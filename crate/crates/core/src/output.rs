//! Artifact writers. Every CSV and JSON file carries the version string,
//! the config echo and the grid sizes. Wall time goes to a `.log` sidecar
//! so reruns of the same config give byte-identical CSV and JSON.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::Result;
use crate::VERSION;

/// What produced an artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub version: String,
    pub command: String,
    pub config: Value,
    /// Grid sizes and other resolution parameters (`N`, `K`, ...).
    pub grid: Map<String, Value>,
    /// Command-line values that override config keys.
    pub flags: Map<String, Value>,
}

impl Provenance {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            version: VERSION.to_string(),
            command: command.to_string(),
            config,
            grid: Map::new(),
            flags: Map::new(),
        }
    }

    pub fn with_grid(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.grid.insert(key.to_string(), value.into());
        self
    }

    pub fn with_flag(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.flags.insert(key.to_string(), value.into());
        self
    }
}

/// One CSV value.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// 17 significant digits, locale independent; `nan`, `inf`, `-inf` as is.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string().to_lowercase()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Render with `#` comment lines for the provenance.
    pub fn render(&self, prov: &Provenance) -> Result<String> {
        let mut out = String::new();
        out.push_str(&format!("# version: {}\n", prov.version));
        out.push_str(&format!("# command: {}\n", prov.command));
        out.push_str(&format!("# config: {}\n", serde_json::to_string(&prov.config)?));
        out.push_str(&format!("# grid: {}\n", serde_json::to_string(&prov.grid)?));
        if !prov.flags.is_empty() {
            out.push_str(&format!("# flags: {}\n", serde_json::to_string(&prov.flags)?));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        out.push_str(&String::from_utf8_lossy(&bytes));
        Ok(out)
    }
}

/// `{version, command, config, grid, flags, passed, result}` as pretty JSON.
pub fn render_json(prov: &Provenance, passed: bool, result: Value) -> Result<String> {
    let doc = json!({
        "version": prov.version,
        "command": prov.command,
        "config": prov.config,
        "grid": prov.grid,
        "flags": prov.flags,
        "passed": passed,
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

/// Paths of the artifacts written by one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub log: PathBuf,
}

/// Write `<dir>/<command>.{csv,json,log}`.
pub fn write_artifacts(
    dir: &Path,
    prov: &Provenance,
    table: &CsvTable,
    passed: bool,
    result: Value,
    wall: Duration,
) -> Result<Artifacts> {
    fs::create_dir_all(dir)?;
    let a = Artifacts {
        csv: dir.join(format!("{}.csv", prov.command)),
        json: dir.join(format!("{}.json", prov.command)),
        log: dir.join(format!("{}.log", prov.command)),
    };
    fs::write(&a.csv, table.render(prov)?)?;
    fs::write(&a.json, render_json(prov, passed, result)?)?;
    fs::write(
        &a.log,
        format!(
            "version: {}\ncommand: {}\npassed: {}\nwall_time_s: {:.3}\n",
            prov.version,
            prov.command,
            passed,
            wall.as_secs_f64()
        ),
    )?;
    Ok(a)
}
