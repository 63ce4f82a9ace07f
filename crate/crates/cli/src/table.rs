//! Output tables: `#` metadata header plus rows, as CSV or JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::{CliError, Format};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Real(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => sig9(*v),
        }
    }

    /// The JSON value carries the same rounding as the CSV text.
    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Real(v) => {
                let rounded: f64 = sig9(*v).parse().unwrap_or(*v);
                serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
            }
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

/// Nine significant digits in scientific notation.
pub fn sig9(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.8e}")
    } else {
        v.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Table {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, meta: &Map<String, Value>) -> String {
        let mut out = String::new();
        for (k, v) in meta {
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("# {k}: {text}\n"));
        }
        out.push_str(&format!("# table: {}\n", self.name));
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, meta: &Map<String, Value>) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        serde_json::json!({
            "metadata": meta,
            "table": self.name,
            "columns": self.columns,
            "rows": rows,
        })
    }

    /// Writes `<prefix>_<name>.<ext>` into `dir`.
    pub fn write(&self, dir: &Path, prefix: &str, meta: &Map<String, Value>, format: Format) -> Result<PathBuf, CliError> {
        let (ext, body) = match format {
            Format::Csv => ("csv", self.to_csv(meta)),
            Format::Json => ("json", serde_json::to_string_pretty(&self.to_json(meta))? + "\n"),
        };
        let path = dir.join(format!("{prefix}_{}.{ext}", self.name));
        fs::write(&path, body).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }
}
