//! Writing experiment outputs: CSV tables, JSON reports, plot data, digests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::RunError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Output directory that remembers a digest of every file written to it.
pub struct OutputDir {
    dir: PathBuf,
    digests: Vec<OutputDigest>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir)?;
        Ok(OutputDir { dir: dir.to_path_buf(), digests: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        fs::write(self.dir.join(name), bytes)?;
        self.digests.push(OutputDigest { file: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    pub fn write_csv(&mut self, name: &str, table: &Table) -> Result<(), RunError> {
        let bytes = table.to_csv()?;
        self.write(name, &bytes)
    }

    pub fn write_plotdata(&mut self, name: &str, points: &[(f64, f64)]) -> Result<(), RunError> {
        let bytes = plotdata_bytes(points)?;
        self.write(name, &bytes)
    }

    pub fn into_digests(self) -> Vec<OutputDigest> {
        self.digests
    }
}

/// A header plus rows of equal width.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, RunError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| RunError::Io(e.into_error()))
    }
}

fn plotdata_bytes(points: &[(f64, f64)]) -> Result<Vec<u8>, RunError> {
    if points.is_empty() {
        return Err(RunError::EmptySeries);
    }
    let mut out = Vec::new();
    for (x, y) in points {
        writeln!(out, "{x} {y}")?;
    }
    Ok(out)
}

/// Writes one series as two whitespace-separated columns. Nothing is written
/// for an empty series.
pub fn emit_plotdata(points: &[(f64, f64)], path: &Path) -> Result<(), RunError> {
    let bytes = plotdata_bytes(points)?;
    fs::write(path, bytes)?;
    Ok(())
}
