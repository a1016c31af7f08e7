//! File ingest and artifact emission.
//!
//! Samples come in as CSV (input columns first, output last); results go
//! out as JSON artifacts written atomically (temp file + rename) so a
//! crashed run never leaves a truncated artifact behind.

use crate::error::{Error, Result};
use ndarray::Array2;
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::Path;

/// A sample read from CSV: input matrix, outputs, column names.
#[derive(Debug, Clone)]
pub struct CsvSample {
    /// `n x d` input matrix.
    pub inputs: Array2<f64>,
    /// Output vector (the last CSV column).
    pub outputs: Vec<f64>,
    /// Header names of the input columns.
    pub input_names: Vec<String>,
    /// Header name of the output column.
    pub output_name: String,
}

/// Read a sample from a headered CSV file. All columns must be numeric;
/// the last column is the output. Parse failures report the data row
/// (1-based, excluding the header) and column name.
pub fn read_sample_csv(path: &Path) -> Result<CsvSample> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("cannot open {}: {e}", path.display()),
        )),
        _ => Error::Config(format!("cannot read {}: {e}", path.display())),
    })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Config(format!("bad CSV header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.len() < 2 {
        return Err(Error::Config(
            "sample CSV needs at least one input column and one output column".into(),
        ));
    }
    let d = headers.len() - 1;
    let mut values: Vec<f64> = Vec::new();
    let mut outputs: Vec<f64> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::CsvData {
            row,
            column: String::from("<record>"),
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(Error::CsvData {
                row,
                column: String::from("<record>"),
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::CsvData {
                row,
                column: headers[j].clone(),
                message: format!("'{field}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::CsvData {
                    row,
                    column: headers[j].clone(),
                    message: format!("non-finite value {v}"),
                });
            }
            if j < d {
                values.push(v);
            } else {
                outputs.push(v);
            }
        }
    }
    if outputs.is_empty() {
        return Err(Error::Config(format!(
            "{} contains no data rows",
            path.display()
        )));
    }
    let n = outputs.len();
    let inputs = Array2::from_shape_vec((n, d), values).expect("row-major layout by construction");
    Ok(CsvSample {
        inputs,
        outputs,
        input_names: headers[..d].to_vec(),
        output_name: headers[d].clone(),
    })
}

/// Write `bytes` to `path` atomically: the content lands in a temporary
/// file in the same directory and is renamed over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| Error::Io(e.error))
        .map(|_| ())
}

/// Serialize a value as pretty JSON (with a trailing newline) and write it
/// atomically.
pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("artifact serialization failed: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Read a run file, mapping a missing file to a clean not-found error.
pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("{} not found", path.display()),
            ))
        } else {
            Error::Io(e)
        }
    })
}
