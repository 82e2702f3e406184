//! Minimal deterministic CSV emission.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::CliError;

/// Number formatted with `digits` significant digits.
pub fn num(v: f64, digits: usize) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{:.*e}", digits - 1, v)
    }
}

pub enum Cell {
    Num(f64),
    Int(usize),
    Bool(bool),
    Text(String),
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

pub struct Table {
    header: Vec<String>,
    body: String,
    rows: usize,
    digits: usize,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S], digits: usize) -> Self {
        Self { header: header.iter().map(|s| s.as_ref().to_string()).collect(), body: String::new(), rows: 0, digits }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.header.len());
        let line: Vec<String> = cells
            .into_iter()
            .map(|c| match c {
                Cell::Num(v) => num(v, self.digits),
                Cell::Int(v) => v.to_string(),
                Cell::Bool(v) => v.to_string(),
                Cell::Text(s) => s,
            })
            .collect();
        let _ = writeln!(self.body, "{}", line.join(","));
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf, CliError> {
        let path = dir.join(name);
        let io = |source| CliError::Io { path: path.clone(), source };
        std::fs::create_dir_all(dir).map_err(io)?;
        let text = format!("{}\n{}", self.header.join(","), self.body);
        std::fs::write(&path, text).map_err(io)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(num(0.5, 15), "5.00000000000000e-1");
        assert_eq!(num(-1234.5, 6), "-1.23450e3");
        assert_eq!(num(f64::INFINITY, 15), "inf");
        let v = 0.1 + 0.2;
        assert_eq!(num(v, 17).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "ok"], 6);
        t.row(vec![1.0.into(), true.into()]);
        assert_eq!(t.rows(), 1);
        let dir = tempfile::tempdir().unwrap();
        let p = t.write(dir.path(), "t.csv").unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "a,ok\n1.00000e0,true\n");
    }
}
