use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            // shortest round-trip form, so files are byte-stable
            Cell::Num(x) => format!("{x:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }
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
        Cell::Int(x as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

/// One CSV artifact: `name` is the file suffix ("" for the main table).
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// extra `# key: value` header lines
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.into(), value.to_string()));
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn column_f64(&self, name: &str) -> Option<Vec<Option<f64>>> {
        self.column(name).map(|c| c.iter().map(|x| x.as_f64()).collect())
    }

    /// Every numeric cell must be finite.
    pub fn check_finite(&self) -> Result<(), CliError> {
        for (r, row) in self.rows.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                if let Cell::Num(x) = cell {
                    if !x.is_finite() {
                        return Err(CliError::Numerical(format!(
                            "non-finite value {x} in column `{}` row {r} of {}",
                            self.columns[c],
                            if self.name.is_empty() { "main table" } else { &self.name }
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// CSV text with `#` header lines.
    pub fn to_csv(&self, header: &[(String, String)]) -> Result<String, CliError> {
        let mut text = String::new();
        for (k, v) in header.iter().chain(&self.notes) {
            text.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        text.push_str(&String::from_utf8(body).map_err(|e| CliError::Io(e.to_string()))?);
        Ok(text)
    }
}

/// `dir/run.csv` + `continuum` -> `dir/run_continuum.csv`
pub fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    let name = if suffix.is_empty() { format!("{stem}.{ext}") } else { format!("{stem}_{suffix}.{ext}") };
    path.with_file_name(name)
}

/// Body lines of a CSV, without `#` header lines.
pub fn csv_body(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}
