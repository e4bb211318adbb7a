//! Run manifest: configuration snapshot, checks and hashed artifacts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// The resolved configuration in `key = value` form.
    pub config: String,
    pub started_unix: u64,
    pub wall_time_seconds: f64,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
}

impl RunManifest {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn read(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Artifacts whose current content no longer matches the recorded hash.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.artifacts
            .iter()
            .filter(|a| match std::fs::read(dir.join(&a.file)) {
                Ok(bytes) => sha256_hex(&bytes) != a.sha256 || bytes.len() != a.bytes,
                Err(_) => true,
            })
            .map(|a| a.file.clone())
            .collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
