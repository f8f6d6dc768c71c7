//! Tables rendered as commented CSV or as a JSON object.
//!
//! Floats are written as `{:.16e}` (17 significant digits) in CSV and as
//! shortest round-trip decimals in JSON. Row order is fixed by the caller.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::args::Format;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) if v.is_nan() => "nan".into(),
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // NaN and infinities have no JSON form.
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Bool(v) => Value::Bool(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

pub type Record = Vec<(&'static str, Cell)>;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: &'static str,
    /// Run-wide provenance.
    pub params: Record,
    /// One record per sweep element (per η, or per verify point).
    pub runs: Vec<Record>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

fn tool() -> String {
    format!("weakval {}", env!("CARGO_PKG_VERSION"))
}

fn csv_record(rec: &Record) -> String {
    rec.iter()
        .map(|(k, v)| format!("{k}={}", v.csv()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn json_record(rec: &Record) -> Value {
    Value::Object(rec.iter().map(|(k, v)| (k.to_string(), v.json())).collect())
}

impl Table {
    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        writeln!(buf, "# {} {}", tool(), self.command).expect("write to Vec");
        writeln!(buf, "# {}", csv_record(&self.params)).expect("write to Vec");
        for run in &self.runs {
            writeln!(buf, "# {}", csv_record(run)).expect("write to Vec");
        }
        let mut w = csv::Writer::from_writer(buf);
        let io = |e: csv::Error| CliError::io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::io(e.to_string()))
    }

    fn render_json(&self) -> Result<Vec<u8>, CliError> {
        let mut obj = Map::new();
        obj.insert("tool".into(), Value::String(tool()));
        obj.insert("command".into(), Value::String(self.command.into()));
        obj.insert("params".into(), json_record(&self.params));
        obj.insert("runs".into(), Value::Array(self.runs.iter().map(json_record).collect()));
        obj.insert("columns".into(), Value::from(self.columns.clone()));
        let rows = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        obj.insert("rows".into(), Value::Array(rows));
        let mut out = serde_json::to_vec_pretty(&Value::Object(obj)).map_err(|e| CliError::io(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io(format!("cannot write to stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        Table {
            command: "photons",
            params: vec![("alpha", 5.0.into()), ("n_det", 0usize.into())],
            runs: vec![vec![("eta", 0.1.into()), ("n_max", 295usize.into())]],
            columns: vec!["eta", "n", "p_numeric", "p_analytic"],
            rows: vec![
                vec![0.1.into(), 0usize.into(), 1.5e-3.into(), Cell::Empty],
                vec![0.1.into(), 1usize.into(), f64::NAN.into(), None::<f64>.into()],
            ],
        }
    }

    #[test]
    fn csv_layout() {
        let text = String::from_utf8(sample().render(Format::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# weakval ") && lines[0].ends_with(" photons"));
        assert_eq!(lines[1], "# alpha=5.0000000000000000e0 n_det=0");
        assert_eq!(lines[2], "# eta=1.0000000000000001e-1 n_max=295");
        assert_eq!(lines[3], "eta,n,p_numeric,p_analytic");
        assert_eq!(lines[4], "1.0000000000000001e-1,0,1.5000000000000000e-3,");
        assert_eq!(lines[5], "1.0000000000000001e-1,1,nan,");
    }

    #[test]
    fn json_layout() {
        let v: Value = serde_json::from_slice(&sample().render(Format::Json).unwrap()).unwrap();
        assert_eq!(v["command"], "photons");
        assert_eq!(v["params"]["alpha"], 5.0);
        assert_eq!(v["runs"][0]["n_max"], 295);
        assert_eq!(v["rows"][0][2], 1.5e-3);
        assert!(v["rows"][1][2].is_null() && v["rows"][1][3].is_null());
    }
}
