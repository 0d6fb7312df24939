//! Run manifests: every command that writes files also writes a manifest
//! recording the configuration, seed, outputs, timing, and a content hash
//! of its inputs — also on failure, with the error recorded.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    /// Hex SHA-256 of the canonical config plus the seed.
    pub input_hash: String,
    pub outputs: Vec<String>,
    pub wall_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Canonical config snapshot.
    pub config: String,
}

impl RunManifest {
    pub fn new(command: &str, config_canonical: &str, seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(config_canonical.as_bytes());
        hasher.update(seed.to_le_bytes());
        let digest = hasher.finalize();
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            input_hash: digest.iter().map(|b| format!("{b:02x}")).collect(),
            outputs: Vec::new(),
            wall_seconds: 0.0,
            error: None,
            config: config_canonical.to_string(),
        }
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("manifest.toml");
        std::fs::write(&path, toml::to_string(self)?)?;
        Ok(path)
    }
}
