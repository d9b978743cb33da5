//! Experiment results: CSV tables, pass/fail checks and the JSON summary.

use std::fmt;
use std::io::Write;
use std::path::Path;

use fresnelio::{Complex64, FresnelError};
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or inputs; exit code 2.
    Usage(String),
    Compute(FresnelError),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(e) => match e {
                FresnelError::InvalidParameter(_)
                | FresnelError::DimensionMismatch { .. }
                | FresnelError::UnboundedGaussian { .. }
                | FresnelError::Config(_) => 2,
                _ => 1,
            },
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<FresnelError> for CliError {
    fn from(e: FresnelError) -> Self {
        CliError::Compute(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

/// Shortest round-trip scientific notation, identical across runs.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn cnum(v: Complex64) -> String {
    let sign = if v.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{sign}{}i", num(v.re), num(v.im.abs()))
}

pub fn cjson(v: Complex64) -> Value {
    json!({"re": v.re, "im": v.im})
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, comments: &[String], columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            comments: comments.to_vec(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row and returns its index.
    pub fn push(&mut self, row: Vec<String>) -> usize {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
        self.rows.len() - 1
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<(), CliError> {
        for c in &self.comments {
            write!(w, "# {c}\r\n")?;
        }
        let mut cw = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w);
        cw.write_record(&self.columns)?;
        for r in &self.rows {
            cw.write_record(r)?;
        }
        cw.flush()?;
        Ok(())
    }

    fn row_text(&self, i: usize) -> String {
        let mut cw = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let _ = cw.write_record(&self.rows[i]);
        let bytes = cw.into_inner().unwrap_or_default();
        String::from_utf8_lossy(&bytes).trim_end().to_string()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    /// `(table, row)` that the check refers to.
    #[serde(skip)]
    pub row: Option<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub experiment: String,
    pub tables: Vec<Table>,
    pub summary: Map<String, Value>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(experiment: &str) -> Self {
        Report { experiment: experiment.to_string(), tables: Vec::new(), summary: Map::new(), checks: Vec::new() }
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>, row: Option<(usize, usize)>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into(), row });
    }

    pub fn set(&mut self, key: &str, v: Value) {
        self.summary.insert(key.to_string(), v);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary_json(&self) -> Value {
        let mut m = self.summary.clone();
        m.insert("experiment".into(), json!(self.experiment));
        m.insert("pass".into(), json!(self.passed()));
        m.insert("checks".into(), serde_json::to_value(&self.checks).unwrap_or(Value::Null));
        Value::Object(m)
    }

    /// Writes the tables and the summary, then reports failing checks on stderr.
    pub fn emit(&self, out: Option<&Path>) -> Result<(), CliError> {
        let summary = serde_json::to_string_pretty(&self.summary_json()).map_err(std::io::Error::other)?;
        match out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                for t in &self.tables {
                    let file = std::fs::File::create(dir.join(format!("{}.csv", t.name)))?;
                    t.write(std::io::BufWriter::new(file))?;
                }
                std::fs::write(dir.join(format!("{}.json", self.experiment)), format!("{summary}\n"))?;
                let mut so = std::io::stdout().lock();
                for c in &self.checks {
                    writeln!(so, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)?;
                }
            }
            None => {
                let mut so = std::io::stdout().lock();
                for (i, t) in self.tables.iter().enumerate() {
                    if i > 0 {
                        writeln!(so)?;
                    }
                    t.write(&mut so)?;
                }
                eprintln!("{summary}");
            }
        }
        for c in self.checks.iter().filter(|c| !c.pass) {
            eprintln!("FAIL {}: {}", c.name, c.detail);
            if let Some((t, r)) = c.row {
                if let Some(table) = self.tables.get(t) {
                    if r < table.rows.len() {
                        eprintln!("  row {} of {}: {}", r + 1, table.name, table.row_text(r));
                    }
                }
            }
        }
        Ok(())
    }
}
