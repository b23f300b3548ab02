use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::SimError;

/// Float with 17 significant digits; round-trips exactly.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    B(bool),
    S(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(i) => i.to_string(),
            Cell::B(b) => b.to_string(),
            Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::I(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::F)
    }
}

/// A CSV file relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub path: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(path: impl Into<String>, header: &[&'static str]) -> Self {
        Self { path: path.into(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(Cell::render).collect();
            let _ = writeln!(s, "{}", line.join(","));
        }
        s
    }
}

/// Everything an experiment hands back to the orchestrator.
#[derive(Debug, Clone, Default)]
pub struct Bundle {
    pub tables: Vec<Table>,
    /// Headline numbers echoed into the manifest.
    pub summary: serde_json::Map<String, Value>,
    pub terms: Vec<hamiltonian_forge::ManifestEntry>,
    pub warnings: Vec<String>,
}

impl Bundle {
    pub fn note(&mut self, key: &str, v: impl Serialize) {
        self.summary.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn table(&self, path: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.path == path)
    }
}

/// Rows `(model, sector, level, eigenvalue)`.
pub fn spectra_table(tag: &str) -> Table {
    Table::new(format!("spectra_{tag}.csv"), &["model", "sector", "level", "eigenvalue"])
}

pub fn push_levels(t: &mut Table, model: &str, sector: &str, levels: &[f64]) {
    for (i, e) in levels.iter().enumerate() {
        t.push(vec![model.into(), sector.into(), i.into(), (*e).into()]);
    }
}

pub fn write_bundle(dir: &Path, bundle: &Bundle, manifest: &Value) -> Result<Vec<String>, SimError> {
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let mut files = Vec::new();
    for t in &bundle.tables {
        let p = dir.join(&t.path);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).map_err(|e| SimError::io(parent, e))?;
        }
        fs::write(&p, t.render()).map_err(|e| SimError::io(&p, e))?;
        files.push(t.path.clone());
    }
    let mut manifest = manifest.clone();
    manifest["files"] = serde_json::to_value(&files).expect("strings");
    let p = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("json value");
    fs::write(&p, text + "\n").map_err(|e| SimError::io(&p, e))?;
    files.push("manifest.json".into());
    Ok(files)
}
