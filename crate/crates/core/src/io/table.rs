//! Comma-separated matrices: one row per line, period decimal separator.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{NbmfError, Result};
use crate::matrix::{BinaryMatrix, DenseMatrix};

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> NbmfError {
    NbmfError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Parses CSV text; `origin` is only used in error messages.
pub fn parse_csv_matrix<R: Read>(reader: R, origin: &Path, require_nonnegative: bool) -> Result<DenseMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            let msg = match e.kind() {
                csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                    format!("row has {len} fields, expected {expected_len}")
                }
                _ => e.to_string(),
            };
            parse_error(origin, line, msg)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        for (c, cell) in record.iter().enumerate() {
            let x: f64 = cell
                .parse()
                .map_err(|_| parse_error(origin, line, format!("column {}: `{cell}` is not a number", c + 1)))?;
            if require_nonnegative && (!x.is_finite() || x < 0.0) {
                return Err(NbmfError::Validation(format!(
                    "{}:{line}: column {}: entry {x} must be finite and nonnegative",
                    origin.display(),
                    c + 1
                )));
            }
            data.push(x);
        }
        cols.get_or_insert(record.len());
        rows += 1;
    }
    let cols = cols.ok_or_else(|| NbmfError::EmptyInput(format!("{} contains no rows", origin.display())))?;
    DenseMatrix::from_vec(rows, cols, data)
}

pub fn load_csv_matrix(path: &Path, require_nonnegative: bool) -> Result<DenseMatrix> {
    let file = File::open(path).map_err(|e| NbmfError::io(path, e))?;
    parse_csv_matrix(file, path, require_nonnegative)
}

pub fn load_binary_csv(path: &Path) -> Result<BinaryMatrix> {
    let dense = load_csv_matrix(path, true)?;
    let bits = dense
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if x == 0.0 || x == 1.0 {
                Ok(x as u8)
            } else {
                Err(parse_error(path, (i / dense.cols() + 1) as u64, format!("`{x}` is not 0 or 1")))
            }
        })
        .collect::<Result<Vec<u8>>>()?;
    BinaryMatrix::from_vec(dense.rows(), dense.cols(), bits)
}

/// Writes rows of preformatted cells.
pub fn write_csv_rows<I, R, S>(path: &Path, rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    let file = File::create(path).map_err(|e| NbmfError::io(path, e))?;
    let mut wtr = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(BufWriter::new(file));
    for row in rows {
        wtr.write_record(row)
            .map_err(|e| NbmfError::io(path, std::io::Error::other(e)))?;
    }
    let mut inner = wtr
        .into_inner()
        .map_err(|e| NbmfError::io(path, std::io::Error::other(e.to_string())))?;
    inner.flush().map_err(|e| NbmfError::io(path, e))
}

/// Shortest round-trip formatting, so reading back is exact.
pub fn write_csv_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    write_csv_rows(
        path,
        (0..m.rows()).map(|r| m.row(r).iter().map(|x| format!("{x:?}")).collect::<Vec<_>>()),
    )
}

pub fn write_binary_csv(path: &Path, m: &BinaryMatrix) -> Result<()> {
    write_csv_rows(
        path,
        (0..m.rows()).map(|r| m.row(r).iter().map(|b| b.to_string()).collect::<Vec<_>>()),
    )
}
