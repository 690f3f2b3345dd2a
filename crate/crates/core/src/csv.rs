//! Minimal CSV writing: header row, optional `#` comment block, LF endings,
//! numbers with 9 significant digits.

use std::fmt::Write as _;

/// Formats `x` with 9 significant digits in scientific notation.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.8e}")
    }
}

#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    comments: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        CsvTable { comments: Vec::new(), header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    /// Adds `#`-prefixed lines placed before the header.
    pub fn comment_block(mut self, text: &str) -> Self {
        self.comments.extend(text.lines().map(|l| l.to_string()));
        self
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn push_numbers(&mut self, values: &[f64]) {
        self.push_row(values.iter().map(|v| fmt_sig(*v)).collect());
    }

    /// Numeric values of the named column; empty cells read as NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].parse().unwrap_or(f64::NAN)).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }
}
