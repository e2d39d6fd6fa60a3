//! Headerless matrix CSV and one-id-per-line label files.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use kindap::DMatrix;

use crate::error::{CliError, CliResult};

/// Parse comma-separated reals, one matrix row per line.
pub fn parse_matrix(text: &str, source: &str) -> CliResult<DMatrix<f64>> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Data(format!("{source}: line {line}: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(CliError::Data(format!(
                    "{source}: line {line}: expected {w} fields, found {}",
                    record.len()
                )))
            }
            _ => {}
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                CliError::Data(format!("{source}: line {line}, column {}: cannot parse {field:?} as a number", col + 1))
            })?;
            if !v.is_finite() {
                return Err(CliError::Data(format!("{source}: line {line}, column {}: non-finite value", col + 1)));
            }
            values.push(v);
        }
        rows += 1;
    }
    let width = width.ok_or_else(|| CliError::Data(format!("{source}: no data rows")))?;
    Ok(DMatrix::from_row_slice(rows, width, &values))
}

pub fn read_matrix(path: &Path) -> CliResult<DMatrix<f64>> {
    parse_matrix(&read_text(path)?, &path.display().to_string())
}

/// Every value written with 17 significant digits, so reading back is exact.
pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::with_capacity(m.nrows() * m.ncols() * 24);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{:.16e}", m[(i, j)]));
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> CliResult<()> {
    write_text(path, &format_matrix(m))
}

pub fn parse_labels(text: &str, source: &str) -> CliResult<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse()
                .map_err(|_| CliError::Data(format!("{source}: line {}: {:?} is not a label", i + 1, l.trim())))
        })
        .collect()
}

pub fn read_labels(path: &Path) -> CliResult<Vec<usize>> {
    parse_labels(&read_text(path)?, &path.display().to_string())
}

pub fn format_labels(labels: &[usize]) -> String {
    labels.iter().map(|l| format!("{l}\n")).collect()
}

pub fn write_labels(path: &Path, labels: &[usize]) -> CliResult<()> {
    write_text(path, &format_labels(labels))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    let mut text = String::new();
    File::open(path).and_then(|mut f| f.read_to_string(&mut text)).map_err(|e| CliError::io(path, e))?;
    Ok(text)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}
