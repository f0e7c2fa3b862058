//! Series tables, CSV files and run reports.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::scenario::Scenario;
use crate::{CliError, Result};

/// Time-indexed columns written as one CSV file.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTable {
    pub name: String,
    pub t: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl SeriesTable {
    pub fn new(name: impl Into<String>, t: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            t,
            columns: Vec::new(),
        }
    }

    pub fn column(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.t.len());
        self.columns.push((name.into(), values));
        self
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// Keeps the selected columns; `None` when nothing is left.
    pub fn select(self, outputs: Option<&[String]>) -> Option<Self> {
        let Some(keep) = outputs else {
            return Some(self);
        };
        let columns: Vec<_> = self.columns.into_iter().filter(|(n, _)| keep.contains(n)).collect();
        (!columns.is_empty()).then_some(Self {
            name: self.name,
            t: self.t,
            columns,
        })
    }
}

/// 17 significant digits, so the decimal text round-trips exactly.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_series(table: &SeriesTable, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut header = vec!["t"];
    header.extend(table.columns.iter().map(|(n, _)| n.as_str()));
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (i, t) in table.t.iter().enumerate() {
        let mut row = vec![fmt17(*t)];
        row.extend(table.columns.iter().map(|(_, v)| fmt17(v[i])));
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Csv {
        path: path.display().to_string(),
        detail: e.to_string(),
    }
}

pub fn read_series(path: &Path) -> Result<SeriesTable> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.first().map(String::as_str) != Some("t") {
        return Err(CliError::Csv {
            path: path.display().to_string(),
            detail: "first column must be `t`".into(),
        });
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut t = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len() - 1];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        for (j, field) in rec.iter().enumerate() {
            let x = f64::from_str(field.trim()).map_err(|_| CliError::Csv {
                path: path.display().to_string(),
                detail: format!("row {}: `{field}` is not a number", line + 2),
            })?;
            if j == 0 {
                t.push(x);
            } else {
                cols[j - 1].push(x);
            }
        }
    }
    Ok(SeriesTable {
        name,
        t,
        columns: header.into_iter().skip(1).zip(cols).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    Linf,
    L2,
}

impl FromStr for Norm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "linf" => Ok(Self::Linf),
            "l2" => Ok(Self::L2),
            _ => Err(format!("unknown norm `{s}`; use linf or l2")),
        }
    }
}

/// Norm of `a − b` over the columns both tables share.
///
/// `l2` is the plain Euclidean norm of the pointwise differences.
pub fn compare_series(a: &SeriesTable, b: &SeriesTable, norm: Norm) -> Result<f64> {
    if a.t.len() != b.t.len() {
        return Err(CliError::GridMismatch(format!(
            "{} vs {} samples",
            a.t.len(),
            b.t.len()
        )));
    }
    if let Some((i, (x, y))) =
        a.t.iter()
            .zip(&b.t)
            .enumerate()
            .find(|(_, (x, y))| (*x - *y).abs() > 1e-12)
    {
        return Err(CliError::GridMismatch(format!("row {i}: t = {x} vs {y}")));
    }
    let shared: Vec<_> = a
        .columns
        .iter()
        .filter_map(|(n, va)| b.get(n).map(|vb| (va, vb)))
        .collect();
    if shared.is_empty() {
        return Err(CliError::GridMismatch("no column names in common".into()));
    }
    let diffs = shared
        .iter()
        .flat_map(|(va, vb)| va.iter().zip(vb.iter()).map(|(x, y)| x - y));
    Ok(match norm {
        Norm::Linf => diffs.map(f64::abs).fold(0.0, f64::max),
        Norm::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Self::Pass => 0,
            Self::Fail => 1,
            Self::Error => 2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub experiment: &'static str,
    pub status: Status,
    pub metrics: BTreeMap<String, f64>,
    /// File names relative to the scenario directory.
    pub series: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunReport {
    pub fn new(s: &Scenario) -> Self {
        Self {
            scenario: s.name.clone(),
            experiment: s.experiment.name(),
            status: Status::Error,
            metrics: BTreeMap::new(),
            series: Vec::new(),
            error: None,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}
