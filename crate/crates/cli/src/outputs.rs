//! Deterministic output files with content digests.
//!
//! CSV rules: mandatory header, UTF-8, '.' decimal, '\n' line endings, f64
//! printed in shortest round-trip form. Identical inputs therefore produce
//! byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Collects every file written during a command for the run manifest.
pub struct OutputWriter {
    out_dir: PathBuf,
    records: Vec<OutputRecord>,
}

impl OutputWriter {
    pub fn new(out_dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(out_dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            records: Vec::new(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    pub fn records(&self) -> &[OutputRecord] {
        &self.records
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.out_dir.join(name);
        fs::write(&path, bytes)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.records.push(OutputRecord {
            path: name.to_string(),
            sha256: hex_digest(bytes),
            bytes: bytes.len(),
        });
        Ok(path)
    }

    pub fn write_csv<I>(&mut self, name: &str, header: &str, rows: I) -> Result<PathBuf, CliError>
    where
        I: IntoIterator<Item = String>,
    {
        let mut text = String::with_capacity(4096);
        text.push_str(header);
        text.push('\n');
        for row in rows {
            text.push_str(&row);
            text.push('\n');
        }
        self.write_bytes(name, text.as_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Shortest round-trip decimal form of an f64 (deterministic).
pub fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn csv_row(fields: &[String]) -> String {
    fields.join(",")
}
