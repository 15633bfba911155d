//! Dataset CSV: header `t,vm_1,…,vm_n,va_1,…,va_n`, one row per instance.

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::Path;

use super::{StateSeries, StateVector};
use crate::error::{DataError, Error, Result};

pub fn load_series(path: impl AsRef<Path>) -> Result<StateSeries> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_series(file)
}

pub fn read_series(reader: impl Read) -> Result<StateSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        None => return Err(DataError::MissingHeader.into()),
        Some(r) => r.map_err(csv_error)?,
    };
    let columns: Vec<String> = header.iter().map(str::to_owned).collect();
    let n = parse_header(&columns)?;
    let width = 2 * n + 1;

    let mut timestamps = Vec::new();
    let mut states = Vec::new();
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(DataError::RaggedRow {
                line,
                expected: width,
                found: record.len(),
            }
            .into());
        }
        let mut row = Vec::with_capacity(width);
        for (cell, column) in record.iter().zip(&columns) {
            let v: f64 = cell.parse().map_err(|_| DataError::NonNumeric {
                line,
                column: column.clone(),
                cell: cell.to_owned(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonFiniteCell {
                    line,
                    column: column.clone(),
                }
                .into());
            }
            row.push(v);
        }
        timestamps.push(row[0]);
        states.push(StateVector::new(row.split_off(1))?);
    }
    if states.len() < 2 {
        return Err(DataError::TooShort {
            found: states.len(),
            needed: 2,
        }
        .into());
    }
    StateSeries::new(n, timestamps, states)
}

fn csv_error(e: csv::Error) -> Error {
    DataError::Csv(e.to_string()).into()
}

fn parse_header(columns: &[String]) -> Result<usize, DataError> {
    let first = columns.first().map(String::as_str).unwrap_or("");
    if first != "t" {
        if first.parse::<f64>().is_ok() {
            return Err(DataError::MissingHeader);
        }
        return Err(DataError::BadHeader(format!(
            "first column must be `t`, found `{first}`"
        )));
    }
    let features = columns.len() - 1;
    if features == 0 || !features.is_multiple_of(2) {
        return Err(DataError::BadHeader(format!(
            "expected an even, non-zero number of state columns, found {features}"
        )));
    }
    let n = features / 2;
    for (i, name) in columns[1..].iter().enumerate() {
        let expected = if i < n {
            format!("vm_{}", i + 1)
        } else {
            format!("va_{}", i - n + 1)
        };
        if *name != expected {
            return Err(DataError::BadHeader(format!(
                "column {} should be `{expected}`, found `{name}`",
                i + 2
            )));
        }
    }
    Ok(n)
}

/// Renders the series with shortest round-trip float formatting, so reading
/// the text back yields bit-identical values.
pub fn series_to_csv(series: &StateSeries) -> String {
    let n = series.n_buses();
    let mut out = String::from("t");
    for i in 1..=n {
        let _ = write!(out, ",vm_{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",va_{i}");
    }
    out.push('\n');
    for (t, s) in series.timestamps().iter().zip(series.states()) {
        let _ = write!(out, "{t}");
        for v in s.as_slice() {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_series(series: &StateSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, series_to_csv(series)).map_err(|e| Error::io(path, e))
}
