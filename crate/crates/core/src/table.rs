//! Plain tabular text output (CSV or JSON lines) with a fixed column order.
//!
//! Floats are written with 17 significant digits so values round-trip
//! exactly.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonlines,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonlines" | "jsonl" => Ok(Format::Jsonlines),
            other => Err(Error::Config(format!(
                "unknown format '{other}' (expected csv or jsonlines)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
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

/// 17 significant digits, `inf`/`-inf`/`nan` for non-finite values.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_float(s: &str) -> Result<f64> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        _ => s
            .parse()
            .map_err(|_| Error::invalid(format!("not a number: '{s}'"))),
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(csv_cell).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            Format::Jsonlines => {
                for row in &self.rows {
                    out.push('{');
                    for (k, (name, cell)) in self.columns.iter().zip(row).enumerate() {
                        if k > 0 {
                            out.push(',');
                        }
                        let _ = write!(out, "{}:{}", json_string(name), json_cell(cell));
                    }
                    out.push_str("}\n");
                }
            }
        }
        out
    }

    /// Parses text written by [`Table::render`]. Every cell is returned as
    /// text; use [`Table::float`] and friends to read typed values.
    pub fn parse(text: &str, format: Format) -> Result<Table> {
        match format {
            Format::Csv => {
                let mut lines = text.lines().filter(|l| !l.trim().is_empty());
                let header = lines
                    .next()
                    .ok_or_else(|| Error::invalid("empty table"))?;
                let columns = split_csv(header);
                let mut rows = Vec::new();
                for (k, line) in lines.enumerate() {
                    let cells = split_csv(line);
                    if cells.len() != columns.len() {
                        return Err(Error::invalid(format!(
                            "line {}: expected {} fields, found {}",
                            k + 2,
                            columns.len(),
                            cells.len()
                        )));
                    }
                    rows.push(cells.into_iter().map(Cell::Text).collect());
                }
                Ok(Table { columns, rows })
            }
            Format::Jsonlines => {
                let mut columns: Vec<String> = Vec::new();
                let mut rows = Vec::new();
                for (k, line) in text.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let value: serde_json::Value = serde_json::from_str(line)
                        .map_err(|e| Error::invalid(format!("line {}: {e}", k + 1)))?;
                    let obj = value
                        .as_object()
                        .ok_or_else(|| Error::invalid(format!("line {}: not an object", k + 1)))?;
                    if columns.is_empty() {
                        columns = obj.keys().cloned().collect();
                    }
                    let mut row = Vec::with_capacity(columns.len());
                    for c in &columns {
                        let v = obj.get(c).ok_or_else(|| {
                            Error::invalid(format!("line {}: missing field '{c}'", k + 1))
                        })?;
                        row.push(Cell::Text(match v {
                            serde_json::Value::String(s) => s.clone(),
                            other => other.to_string(),
                        }));
                    }
                    rows.push(row);
                }
                Ok(Table { columns, rows })
            }
        }
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::invalid(format!("missing column '{name}'")))
    }

    pub fn text(&self, row: usize, col: usize) -> String {
        match &self.rows[row][col] {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
        }
    }

    pub fn float(&self, row: usize, col: usize) -> Result<f64> {
        match &self.rows[row][col] {
            Cell::Float(x) => Ok(*x),
            Cell::Int(i) => Ok(*i as f64),
            Cell::Text(s) => parse_float(s),
        }
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) => format_float(*x),
        Cell::Text(s) if s.contains([',', '"', '\n']) => {
            format!("\"{}\"", s.replace('"', "\"\""))
        }
        Cell::Text(s) => s.clone(),
    }
}

fn split_csv(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(ch) = chars.next() {
        match ch {
            '"' if quoted && chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            '"' => quoted = !quoted,
            ',' if !quoted => out.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    out.push(cur);
    out
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

fn json_cell(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) if x.is_finite() => format_float(*x),
        Cell::Float(x) => json_string(&format_float(*x)),
        Cell::Text(s) => json_string(s),
    }
}
