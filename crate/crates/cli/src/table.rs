//! Column-table artifact with deterministic serialization.
//!
//! Every command reduces to one or more tables. The CSV form is canonical:
//! header row first, rows in computation order, every number printed as
//! C-style `%.12e` (13 significant digits, sign-carrying two-digit
//! exponent), UTF-8 with LF endings. Identical configuration therefore
//! yields byte-identical files. The JSON form mirrors the same rows for
//! machine consumption.

use std::fs;
use std::io;
use std::path::Path;

/// `%.12e` rendering: pad the exponent of Rust's `{:.12e}` to at least two
/// digits and make its sign explicit.
pub fn e12(x: f64) -> String {
    let s = format!("{x:.12e}");
    let (mantissa, exponent) = s.split_once('e').expect("float formatting always has an exponent");
    let (sign, digits) = match exponent.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exponent),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: Vec<&'static str>) -> Self {
        Self { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|&v| e12(v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::json!({
            "name": self.name,
            "columns": self.columns,
            "rows": self.rows,
        });
        let mut s = serde_json::to_string_pretty(&value).expect("tables are plain data");
        s.push('\n');
        s
    }

    /// Write under `dir` as `{name}.csv` or `{name}.json`.
    pub fn write(&self, dir: &Path, json: bool) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let (ext, body) = if json { ("json", self.to_json()) } else { ("csv", self.to_csv()) };
        fs::write(dir.join(format!("{}.{ext}", self.name)), body)
    }
}
