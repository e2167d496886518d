//! Plain-text tables for the command reports.

use std::fmt::Write;

/// Fixed-point for moderate magnitudes, scientific otherwise.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if !v.is_finite() {
        format!("{v}")
    } else if (1e-3..1e6).contains(&v.abs()) {
        format!("{v:.4}")
    } else {
        format!("{v:.4e}")
    }
}

pub fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.into()
}

/// Rows of a label column followed by value columns.
#[derive(Debug, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<(String, Vec<String>)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            header: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, label: impl Into<String>, values: Vec<String>) -> &mut Self {
        self.rows.push((label.into(), values));
        self
    }

    pub fn render(&self) -> String {
        let label_w = self.rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(8);
        let ncols = self.header.len();
        let mut widths: Vec<usize> = self.header.iter().map(String::len).collect();
        for (_, vals) in &self.rows {
            for (j, v) in vals.iter().enumerate().take(ncols) {
                widths[j] = widths[j].max(v.len());
            }
        }
        let mut out = String::new();
        let _ = write!(out, "{:label_w$}", "");
        for (h, w) in self.header.iter().zip(&widths) {
            let _ = write!(out, "  {h:>w$}");
        }
        out.push('\n');
        for (label, vals) in &self.rows {
            let _ = write!(out, "{label:label_w$}");
            for (j, w) in widths.iter().enumerate() {
                let v = vals.get(j).map(String::as_str).unwrap_or("");
                let _ = write!(out, "  {v:>w$}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(num(-45.990935), "-45.9909");
        assert_eq!(num(7.8776e-5), "7.8776e-5");
        assert_eq!(num(0.0), "0");
        let mut t = Table::new(&["LR", "ORG"]);
        t.row("log-likelihood", vec![num(-45.99), num(-94.9)]);
        t.row("tau_1", vec![num(-2.69), "-".into()]);
        let s = t.render();
        assert_eq!(s.lines().count(), 3);
        assert!(s.lines().all(|l| l.len() == s.lines().next().unwrap().len()));
    }
}
