use std::fs::File;
use std::path::Path;

use kdehpd::data::Dataset;

use crate::error::{CliError, CliResult};

/// Numeric table read from a headered CSV file.
#[derive(Debug, Clone)]
pub struct Table {
    pub headers: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }
}

pub fn reader(path: &Path) -> CliResult<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file))
}

pub fn writer(path: &Path) -> CliResult<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

/// Reads a table whose every cell must be a finite number. Data rows are
/// numbered from 1 in error messages.
pub fn read_numeric(path: &Path) -> CliResult<Table> {
    let mut rdr = reader(path)?;
    let bad = |e: csv::Error| CliError::Usage(format!("{}: {e}", path.display()));
    let headers: Vec<String> = rdr
        .headers()
        .map_err(bad)?
        .iter()
        .map(str::to_owned)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(CliError::Usage(format!(
            "{}: missing header row",
            path.display()
        )));
    }
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(bad)?;
        let row = i + 1;
        let mut parsed = Vec::with_capacity(rec.len());
        for (cell, col) in rec.iter().zip(&headers) {
            let cell = cell.trim();
            if cell.is_empty() {
                return Err(CliError::Usage(format!(
                    "{}: row {row}: missing value in column '{col}'",
                    path.display()
                )));
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => parsed.push(v),
                _ => {
                    return Err(CliError::Usage(format!(
                        "{}: row {row}, column '{col}': not a finite number: '{cell}'",
                        path.display()
                    )))
                }
            }
        }
        values.push(parsed);
    }
    Ok(Table { headers, values })
}

/// Splits a table into covariates `covariates` (in that order) and the
/// response column `target`.
pub fn to_dataset(
    table: &Table,
    covariates: &[String],
    target: Option<&str>,
    path: &Path,
) -> CliResult<Dataset> {
    let cols: Vec<usize> = covariates
        .iter()
        .map(|c| {
            table.column(c).ok_or_else(|| {
                CliError::Usage(format!(
                    "{}: covariate column '{c}' missing",
                    path.display()
                ))
            })
        })
        .collect::<CliResult<_>>()?;
    let y = match target {
        Some(t) => {
            let j = table.column(t).ok_or_else(|| {
                CliError::Usage(format!("{}: target column '{t}' missing", path.display()))
            })?;
            table.values.iter().map(|r| r[j]).collect()
        }
        None => vec![0.0; table.len()],
    };
    let rows = table
        .values
        .iter()
        .map(|r| cols.iter().map(|&j| r[j]).collect())
        .collect();
    Ok(Dataset::from_rows(rows, y)?)
}

/// Number formatting shared by every output file: shortest round-trip
/// decimal, `inf`/`-inf` for infinities.
pub fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

pub fn parse_num(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        t => t.parse().ok(),
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}
