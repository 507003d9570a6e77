//! Numeric matrix CSV: rows are observations, an optional header row.

use std::path::Path;

use esd_indep::eigcore::DataMatrix;

use crate::error::{CliError, Result};

/// Reads an `n x p` real matrix.
pub fn read_matrix_csv(path: &Path) -> Result<DataMatrix> {
    let name = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_error(&name, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(&name, e))?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if rows.is_empty() && width.is_none() => {
                // Header row: remember its width only.
                width = Some(record.len());
                continue;
            }
            Err(_) => {
                let col = record
                    .iter()
                    .position(|f| f.parse::<f64>().is_err())
                    .unwrap_or(0);
                return Err(parse_err(
                    &name,
                    line,
                    format!("column {}: '{}' is not a number", col + 1, &record[col]),
                ));
            }
        };
        if let Some(col) = values.iter().position(|v| !v.is_finite()) {
            return Err(parse_err(
                &name,
                line,
                format!("column {}: non-finite value '{}'", col + 1, &record[col]),
            ));
        }
        match width {
            Some(w) if w != values.len() => {
                return Err(parse_err(
                    &name,
                    line,
                    format!("expected {w} fields, found {}", values.len()),
                ));
            }
            _ => width = Some(values.len()),
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(CliError::NoRows(name));
    }
    Ok(DataMatrix::from_rows(&rows)?)
}

fn parse_err(path: &str, line: u64, msg: String) -> CliError {
    CliError::Parse {
        path: path.to_string(),
        line,
        msg,
    }
}

pub(crate) fn csv_error(path: &str, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => parse_err(path, line, format!("{other:?}")),
    }
}
