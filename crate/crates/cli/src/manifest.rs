//! Per-stage run manifest: configuration hash, input and output file hashes,
//! tool version, and seed. Written alongside the artifacts so identical runs
//! can be verified byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::AppError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileHash {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub stage: String,
    pub tool_version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
}

impl RunManifest {
    pub fn new(stage: &str, seed: u64, config_json: &str) -> Self {
        Self {
            stage: stage.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config_sha256: sha256_hex(config_json.as_bytes()),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path) -> Result<(), AppError> {
        self.inputs.push(hash_file(path)?);
        Ok(())
    }

    pub fn record_output(&mut self, path: &Path) -> Result<(), AppError> {
        self.outputs.push(hash_file(path)?);
        Ok(())
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf, AppError> {
        let path = out_dir.join(format!("manifest_{}.json", self.stage));
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| AppError::input(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, json)
            .map_err(|e| AppError::input(format!("writing {}: {e}", path.display())))?;
        Ok(path)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

fn hash_file(path: &Path) -> Result<FileHash, AppError> {
    let bytes = std::fs::read(path)
        .map_err(|e| AppError::input(format!("hashing {}: {e}", path.display())))?;
    Ok(FileHash {
        name: path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string()),
        sha256: sha256_hex(&bytes),
    })
}
