//! CSV readers and writers for point sets, arrival data and instance rows.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trace::fmt_num;

fn parse_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Reads a headerless numeric CSV, one row per line. All rows must have
/// the same length.
pub fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| parse_err(path, format!("row {}: {e}", line + 1)))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, "no rows"));
    }
    Ok(rows)
}

pub fn write_matrix_csv<T: Scalar>(path: &Path, rows: &[Vec<T>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| fmt_num(v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads arrival data with header `time,dim` (dimension ids 1-based) and
/// returns `(time, dim)` pairs with 0-based dimensions, in file order.
pub fn read_arrivals_csv(path: &Path) -> Result<Vec<(f64, usize)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "time" || &headers[1] != "dim" {
        return Err(parse_err(path, "expected header time,dim"));
    }
    let mut events = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let t: f64 = rec[0]
            .parse()
            .map_err(|e| parse_err(path, format!("row {}: time: {e}", line + 2)))?;
        let d: usize = rec[1]
            .parse()
            .map_err(|e| parse_err(path, format!("row {}: dim: {e}", line + 2)))?;
        if d == 0 {
            return Err(parse_err(path, format!("row {}: dimensions are 1-based", line + 2)));
        }
        events.push((t, d - 1));
    }
    Ok(events)
}

pub fn write_arrivals_csv(path: &Path, events: &[(f64, usize)]) -> Result<()> {
    let mut f = std::io::BufWriter::new(File::create(path)?);
    writeln!(f, "time,dim")?;
    for &(t, d) in events {
        writeln!(f, "{t:.17e},{}", d + 1)?;
    }
    f.flush()?;
    Ok(())
}
