//! CSV ingestion with per-column transforms and a drop report.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// The bundled Wisconsin Diagnostic Breast Cancer data (569 rows, label
/// column `diagnosis` with tokens `M`/`B`).
pub const WDBC_CSV: &str = include_str!("../../data/wdbc.csv");

/// Default feature list for the WDBC data.
pub const WDBC_FEATURES: &str = "intercept,texture_worst,area_worst:log,smoothness_worst,\
compactness_worst:log,concave_points_worst:log,symmetry_worst:log";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    Log,
}

/// One design-matrix column: a transformed CSV column or the intercept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FeatureSpec {
    Column { name: String, transform: Transform },
    Intercept,
}

impl FeatureSpec {
    pub fn label(&self) -> String {
        match self {
            FeatureSpec::Intercept => "intercept".to_string(),
            FeatureSpec::Column {
                name,
                transform: Transform::Identity,
            } => name.clone(),
            FeatureSpec::Column {
                name,
                transform: Transform::Log,
            } => format!("log({name})"),
        }
    }
}

impl FromStr for FeatureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("intercept")
            || s.eq_ignore_ascii_case(":add-intercept")
            || s.eq_ignore_ascii_case("add-intercept")
        {
            return Ok(FeatureSpec::Intercept);
        }
        let (name, t) = match s.rsplit_once(':') {
            Some((n, t)) => (n.trim(), t.trim()),
            None => (s, "identity"),
        };
        if name.is_empty() {
            return Err(Error::InvalidInput(format!("empty column name in feature '{s}'")));
        }
        let transform = match t.to_ascii_lowercase().as_str() {
            "identity" | "id" | "" => Transform::Identity,
            "log" => Transform::Log,
            "add-intercept" | "intercept" => return Ok(FeatureSpec::Intercept),
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown transform '{other}' for column '{name}'"
                )))
            }
        };
        Ok(FeatureSpec::Column {
            name: name.to_string(),
            transform,
        })
    }
}

/// Parses a comma-separated `name[:transform]` list.
pub fn parse_features(list: &str) -> Result<Vec<FeatureSpec>> {
    let specs: Vec<FeatureSpec> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if specs.is_empty() {
        return Err(Error::InvalidInput("feature list is empty".into()));
    }
    Ok(specs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadConfig {
    pub label_col: String,
    pub positive: String,
    pub features: Vec<FeatureSpec>,
    pub delimiter: u8,
}

impl LoadConfig {
    pub fn wdbc() -> Self {
        Self {
            label_col: "diagnosis".into(),
            positive: "M".into(),
            features: parse_features(WDBC_FEATURES).expect("valid preset"),
            delimiter: b',',
        }
    }
}

/// Rows removed because a log-transformed value was not positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropReport {
    pub rows_read: usize,
    pub rows_kept: usize,
    /// 1-based data row numbers (header excluded).
    pub dropped_rows: Vec<usize>,
    /// `(column, count)` in feature order, columns with no drops omitted.
    pub dropped_by_column: Vec<(String, usize)>,
    pub class_counts: (usize, usize),
}

impl fmt::Display for DropReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "read {} rows, kept {} (class 1: {}, class 0: {}), dropped {}",
            self.rows_read,
            self.rows_kept,
            self.class_counts.1,
            self.class_counts.0,
            self.dropped_rows.len()
        )?;
        for (c, n) in &self.dropped_by_column {
            write!(f, "; {c}: {n} non-positive")?;
        }
        Ok(())
    }
}

pub fn load_csv(path: &Path, cfg: &LoadConfig) -> Result<(Dataset, DropReport)> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    load_csv_reader(file, cfg)
}

/// The bundled WDBC data with the default feature list.
pub fn load_wdbc() -> Result<(Dataset, DropReport)> {
    load_csv_reader(WDBC_CSV.as_bytes(), &LoadConfig::wdbc())
}

pub fn load_csv_reader<R: Read>(reader: R, cfg: &LoadConfig) -> Result<(Dataset, DropReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(cfg.delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Csv {
            row: 0,
            column: String::new(),
            message: e.to_string(),
        })?
        .clone();
    let find = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Csv {
            row: 0,
            column: name.to_string(),
            message: "column not found in header".into(),
        })
    };
    let label_idx = find(&cfg.label_col)?;
    let cols: Vec<Option<(usize, Transform)>> = cfg
        .features
        .iter()
        .map(|f| match f {
            FeatureSpec::Intercept => Ok(None),
            FeatureSpec::Column { name, transform } => Ok(Some((find(name)?, *transform))),
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut dropped_rows = Vec::new();
    let mut drop_counts = vec![0usize; cfg.features.len()];
    let mut rows_read = 0;
    for (i, rec) in rdr.records().enumerate() {
        let row_no = i + 1;
        let rec = rec.map_err(|e| Error::Csv {
            row: row_no,
            column: String::new(),
            message: e.to_string(),
        })?;
        rows_read += 1;
        let label = rec.get(label_idx).unwrap_or("");
        let y = u8::from(label == cfg.positive);

        let mut row = Vec::with_capacity(cols.len());
        let mut drop = false;
        for (j, col) in cols.iter().enumerate() {
            let Some((idx, transform)) = col else {
                row.push(1.0);
                continue;
            };
            let cell = rec.get(*idx).unwrap_or("");
            let v: f64 = cell.parse().map_err(|_| Error::Csv {
                row: row_no,
                column: headers[*idx].to_string(),
                message: format!("cannot parse '{cell}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    row: row_no,
                    column: headers[*idx].to_string(),
                    message: format!("non-finite value '{cell}'"),
                });
            }
            match transform {
                Transform::Identity => row.push(v),
                Transform::Log if v > 0.0 => row.push(v.ln()),
                Transform::Log => {
                    if !drop {
                        drop_counts[j] += 1;
                    }
                    drop = true;
                    row.push(f64::NAN);
                }
            }
        }
        if drop {
            dropped_rows.push(row_no);
        } else {
            rows.push(row);
            labels.push(y);
        }
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput(format!(
            "all {rows_read} rows were dropped or the file has no data"
        )));
    }
    let names: Vec<String> = cfg.features.iter().map(FeatureSpec::label).collect();
    let n1 = labels.iter().filter(|&&y| y == 1).count();
    let report = DropReport {
        rows_read,
        rows_kept: rows.len(),
        dropped_rows,
        dropped_by_column: cfg
            .features
            .iter()
            .zip(&drop_counts)
            .filter(|(_, &n)| n > 0)
            .map(|(f, &n)| (f.label(), n))
            .collect(),
        class_counts: (rows.len() - n1, n1),
    };
    let data = Dataset::from_rows(&rows, labels, names)?;
    Ok((data, report))
}
