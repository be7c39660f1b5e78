//! Line-delimited benchmark records: a schema header, then one JSON object
//! per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::bench::TttRecord;
use crate::error::{NbmfError, Result};

pub const RECORDS_HEADER: &str = "#nbmf-records v1";

pub fn write_records(records: &[TttRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| NbmfError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io_err = |e| NbmfError::io(path, e);
    writeln!(out, "{RECORDS_HEADER}").map_err(io_err)?;
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| NbmfError::io(path, std::io::Error::other(e)))?;
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn read_records(path: &Path) -> Result<Vec<TttRecord>> {
    let file = File::open(path).map_err(|e| NbmfError::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| NbmfError::io(path, e))?,
        None => {
            return Err(NbmfError::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: "missing header line".into(),
            })
        }
    };
    if header.trim_end() != RECORDS_HEADER {
        return Err(NbmfError::SchemaVersion {
            found: header.trim_end().to_string(),
            expected: RECORDS_HEADER.to_string(),
        });
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| NbmfError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| NbmfError::Parse {
            path: path.to_path_buf(),
            line: i as u64 + 2,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}
