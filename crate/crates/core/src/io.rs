//! File helpers shared by every module that reads or writes artifacts.
//!
//! All CSV output is produced in memory first so the same bytes can be
//! hashed for the run manifest. Floats use Rust's shortest round-trip
//! formatting, `.` decimal separator, and LF line endings.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes).as_slice())
}

/// Derives an independent 64-bit seed for a named stage from the master
/// seed, so each stage can be re-run in isolation with identical results.
pub fn derive_seed(master: u64, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(b":");
    h.update(stage.as_bytes());
    let out = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&out.as_slice()[..8]);
    u64::from_le_bytes(first)
}

pub(crate) fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    // Writing into a Vec cannot fail.
    w.into_inner().expect("in-memory csv writer")
}

pub(crate) fn csv_reader(data: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(data)
}

pub(crate) fn csv_error(path: &Path, err: &csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    Error::Csv {
        path: path.to_path_buf(),
        line,
        msg: err.to_string(),
    }
}

/// Checks that a CSV header matches `expected` exactly (after trimming).
pub(crate) fn expect_header(
    path: &Path,
    rdr: &mut csv::Reader<&[u8]>,
    expected: &[&str],
) -> Result<()> {
    let headers = rdr.headers().map_err(|e| csv_error(path, &e))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("expected header `{}`, got `{}`", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

pub(crate) fn parse_field<T: std::str::FromStr>(
    path: &Path,
    record: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<T> {
    let line = record.position().map(|p| p.line()).unwrap_or(0);
    let raw = record.get(idx).ok_or_else(|| Error::Csv {
        path: path.to_path_buf(),
        line,
        msg: format!("missing column `{name}`"),
    })?;
    raw.parse::<T>().map_err(|_| Error::Csv {
        path: path.to_path_buf(),
        line,
        msg: format!("cannot parse `{raw}` as {name}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_are_stable_and_stage_specific() {
        assert_eq!(derive_seed(7, "simulate"), derive_seed(7, "simulate"));
        assert_ne!(derive_seed(7, "simulate"), derive_seed(7, "synthpop"));
        assert_ne!(derive_seed(7, "simulate"), derive_seed(8, "simulate"));
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
