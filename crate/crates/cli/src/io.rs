use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{CliError, CliResult};

/// Reads a header-free numeric CSV into an `n × d` matrix. Every row must have
/// the width of the first.
pub fn read_matrix(path: &Path) -> CliResult<DMatrix<f64>> {
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(CliError::Parse {
                    path: shown,
                    row,
                    reason: format!("expected {w} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        for field in record.iter() {
            let x: f64 = field.parse().map_err(|_| CliError::Parse {
                path: shown.clone(),
                row,
                reason: format!("not a number: {field:?}"),
            })?;
            values.push(x);
        }
        rows += 1;
    }
    let width = width.filter(|&w| w > 0).ok_or_else(|| CliError::Parse {
        path: shown.clone(),
        row: 0,
        reason: "no data".to_string(),
    })?;
    Ok(DMatrix::from_row_slice(rows, width, &values))
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

/// Writes `m` without a header, one matrix row per line.
pub fn write_matrix(out: impl Write, m: &DMatrix<f64>) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|&x| fmt_f64(x)))?;
    }
    w.flush()?;
    Ok(())
}

/// A file when `path` is given, stdout otherwise.
pub fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}
