use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use klmoments::FieldParams;
use serde_json::{json, Map, Value};

/// A rectangular table rendered either as CSV or as a JSON object with
/// provenance headers and an array of row objects.
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// A table cell. Big integers and hex elements are strings in JSON.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        match i64::try_from(v) {
            Ok(v) => Cell::Int(v),
            Err(_) => Cell::Text(v.to_string()),
        }
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

pub fn hex(v: u32) -> String {
    format!("{v:#x}")
}

/// `{"q", "r", "modulus"}` headers.
pub fn provenance(p: &FieldParams) -> Map<String, Value> {
    let mut map = Map::new();
    map.insert("q".into(), json!(p.q()));
    map.insert("r".into(), json!(p.r()));
    map.insert("modulus".into(), json!(hex(p.modulus())));
    map
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, mut header: Map<String, Value>, extra: Map<String, Value>) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        header.extend(extra);
        header.insert(self.name.into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(header)).expect("valid json");
        s.push('\n');
        s
    }
}

pub fn write_payload(path: Option<&Path>, payload: &str) -> io::Result<()> {
    match path {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(payload.as_bytes())?;
            w.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(payload.as_bytes())?;
            lock.flush()
        }
    }
}
