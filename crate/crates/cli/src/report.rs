use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(Option<f64>),
    Int(u64),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(Some(x)) => format!("{x:.16e}"),
            Cell::Float(None) => String::new(),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) => x.map_or(Value::Null, Value::from),
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub worst: f64,
    pub limit: f64,
    pub pass: bool,
}

/// A finished command: one table of rows, the pass/fail checks and any
/// scalar summaries.
#[derive(Debug, Clone)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub checks: Vec<Check>,
    pub summary: serde_json::Map<String, Value>,
}

impl Report {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            checks: Vec::new(),
            summary: serde_json::Map::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_csv(&self, hash: &str) -> String {
        let mut s = self.columns.join(",");
        s.push_str(",config_hash\n");
        for row in &self.rows {
            for cell in row {
                let _ = write!(s, "{},", cell.csv());
            }
            s.push_str(hash);
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self, config: &RunConfig, hash: &str) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let v = json!({
            "command": config.command().name(),
            "config_hash": hash,
            "config": config,
            "columns": self.columns,
            "rows": rows,
            "probes": self.checks,
            "pass": self.passed(),
            "summary": self.summary,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, contents).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(Cell::Float(Some(x)).csv().parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn missing_values_are_empty_cells() {
        let mut r = Report::new(vec!["a", "b"]);
        r.rows.push(vec![Cell::Float(None), Cell::Int(3)]);
        assert_eq!(r.to_csv("h"), "a,b,config_hash\n,3,h\n");
    }
}
