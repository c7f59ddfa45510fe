//! Report assembly and the two output encodings.

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use qit_core::Base;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// An iterative or SDP path stopped short of the requested tolerance.
    NotConverged,
    /// A verification suite exceeded its tolerance.
    Failed,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NotConverged => "not_converged",
            Status::Failed => "failed",
        }
    }

    pub fn worst(self, other: Status) -> Status {
        match (self, other) {
            (Status::Failed, _) | (_, Status::Failed) => Status::Failed,
            (Status::NotConverged, _) | (_, Status::NotConverged) => Status::NotConverged,
            _ => Status::Ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
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
        Cell::Text(x.into())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            // non-finite values have no JSON number; spell them out
            Cell::Num(x) if !x.is_finite() => Value::String(fmt_sig(*x)),
            Cell::Num(x) => Value::from(*x),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_sig(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// One output record: ordered scalar fields plus optional JSON-only detail
/// (certificates, witnesses) that CSV leaves out.
#[derive(Clone, Debug, Default)]
pub struct Row {
    pub fields: Vec<(String, Cell)>,
    pub detail: Option<Value>,
}

impl Row {
    pub fn new() -> Self {
        Row::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Cell>) -> Self {
        self.fields.push((key.into(), value.into()));
        self
    }

    pub fn detail(mut self, v: Value) -> Self {
        self.detail = Some(v);
        self
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, v) in &self.fields {
            m.insert(k.clone(), v.to_json());
        }
        if let Some(d) = &self.detail {
            m.insert("detail".into(), d.clone());
        }
        Value::Object(m)
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: &'static str,
    pub base: Base,
    pub status: Status,
    pub rows: Vec<Row>,
    /// Closing record; JSON only (CSV sends it to standard error).
    pub summary: Option<Row>,
}

impl Report {
    pub fn new(command: &'static str, base: Base) -> Self {
        Report { command, base, status: Status::Ok, rows: Vec::new(), summary: None }
    }

    /// Adds a row, stamping the command, log base and witness hash.
    pub fn push(&mut self, row: Row, witness: &Value) {
        let mut fields = vec![("command".to_string(), Cell::from(self.command))];
        fields.extend(row.fields);
        fields.push(("base".into(), Cell::from(base_name(self.base))));
        fields.push(("witness_sha256".into(), Cell::Text(witness_hash(witness))));
        self.rows.push(Row { fields, detail: row.detail });
    }

    pub fn mark(&mut self, s: Status) {
        self.status = self.status.worst(s);
    }

    /// Standard output text and, for CSV, the summary line for standard error.
    pub fn render(&self, format: Format) -> (String, Option<String>) {
        let mut summary = self.summary.clone().unwrap_or_default();
        summary.fields.insert(0, ("command".into(), Cell::from(self.command)));
        summary.fields.insert(1, ("status".into(), Cell::from(self.status.name())));
        match format {
            Format::Json => {
                let mut out = String::new();
                for r in &self.rows {
                    out.push_str(&r.to_json().to_string());
                    out.push('\n');
                }
                out.push_str(&summary.to_json().to_string());
                out.push('\n');
                (out, None)
            }
            Format::Csv => {
                let mut out = String::new();
                if let Some(first) = self.rows.first() {
                    let header: Vec<&str> = first.fields.iter().map(|(k, _)| k.as_str()).collect();
                    out.push_str(&header.join(","));
                    out.push('\n');
                    for r in &self.rows {
                        let cells: Vec<String> = r.fields.iter().map(|(_, v)| v.to_csv()).collect();
                        out.push_str(&cells.join(","));
                        out.push('\n');
                    }
                }
                (out, Some(summary.to_json().to_string()))
            }
        }
    }
}

pub fn base_name(b: Base) -> &'static str {
    match b {
        Base::Two => "2",
        Base::E => "e",
    }
}

/// Hex SHA-256 of the compact JSON encoding.
pub fn witness_hash(v: &Value) -> String {
    hex::encode(Sha256::digest(v.to_string().as_bytes()))
}

/// Decimal rendering with 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci.split_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-5..12).contains(&exp) {
        format!("{x:.*}", (11 - exp) as usize)
    } else {
        sci
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig(0.5), "0.500000000000");
        assert_eq!(fmt_sig(1.0), "1.00000000000");
        assert_eq!(fmt_sig(-123.456), "-123.456000000");
        assert_eq!(fmt_sig(0.146446609406726), "0.146446609407");
        assert_eq!(fmt_sig(1e-7), "1.00000000000e-7");
        assert_eq!(fmt_sig(9.9999999999999e-1), "1.00000000000");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(fmt_sig(0.0), "0");
    }

    #[test]
    fn csv_quotes_text() {
        assert_eq!(Cell::from("a,b").to_csv(), "\"a,b\"");
        assert_eq!(Cell::from("plain").to_csv(), "plain");
    }
}
