//! Run manifests and the artifact writer that feeds them.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::plot::{render, PlotSpec};

/// File name of the manifest inside the output directory. It is the one
/// file a run produces that is not listed in `files`, since it holds the
/// listing and the timestamps.
pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckResult {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), pass: value <= threshold, value, threshold, detail: String::new() }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), pass: value >= threshold, value, threshold, detail: String::new() }
    }

    pub fn flag(name: &str, pass: bool) -> Self {
        Self { name: name.into(), pass, value: f64::from(u8::from(pass)), threshold: 1.0, detail: String::new() }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Pass,
    CheckFailure,
    ConfigError,
    NumericalFailure,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::CheckFailure => 1,
            RunStatus::ConfigError => 2,
            RunStatus::NumericalFailure => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    /// SHA-256 of the canonical configuration.
    pub config_hash: String,
    pub tool_version: String,
    pub started: DateTime<Utc>,
    pub finished: DateTime<Utc>,
    pub files: Vec<FileEntry>,
    pub checks: Vec<CheckResult>,
    pub status: RunStatus,
    /// Originating module error of a numerical failure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunManifest {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Writes files into one output directory and records their digests.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        let entry = FileEntry { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 };
        match self.files.iter_mut().find(|f| f.path == name) {
            Some(existing) => *existing = entry,
            None => self.files.push(entry),
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes `name.csv` and its rendering `name.svg`.
    pub fn write_plotted_csv(&mut self, name: &str, csv: &str, spec: &PlotSpec) -> Result<(), crate::RunError> {
        self.write(&format!("{name}.csv"), csv.as_bytes())?;
        let svg = render(csv, spec)?;
        self.write(&format!("{name}.svg"), svg.as_bytes())?;
        Ok(())
    }

    pub fn into_files(self) -> Vec<FileEntry> {
        self.files
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn rewriting_a_file_replaces_its_entry() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::new(dir.path());
        a.write("x.txt", b"one").unwrap();
        a.write("x.txt", b"two").unwrap();
        let files = a.into_files();
        assert_eq!(files.len(), 1);
        assert_eq!(files[0].sha256, sha256_hex(b"two"));
        assert_eq!(std::fs::read(dir.path().join("x.txt")).unwrap(), b"two");
    }

    #[test]
    fn exit_codes() {
        let codes: Vec<i32> = [RunStatus::Pass, RunStatus::CheckFailure, RunStatus::ConfigError, RunStatus::NumericalFailure]
            .iter()
            .map(|s| s.exit_code())
            .collect();
        assert_eq!(codes, vec![0, 1, 2, 3]);
    }
}
