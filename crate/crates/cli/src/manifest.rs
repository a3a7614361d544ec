//! Run manifests: the resolved configuration, seed and output digests that
//! accompany every file the tool writes.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ResolvedConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    /// File name, relative to the directory holding the manifest.
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command_line: Vec<String>,
    /// Resolved configuration, SI and dimensionless, including the scales block.
    pub config: serde_json::Value,
    pub master_seed: Option<u64>,
    pub timestamp_unix: u64,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// Path of the manifest written next to `output`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

impl RunManifest {
    pub fn new(config: &ResolvedConfig, command_line: Vec<String>, master_seed: Option<u64>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command_line,
            config: serde_json::to_value(config).expect("resolved config serializes"),
            master_seed,
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            outputs: Vec::new(),
        }
    }

    /// Digests `output` and writes the manifest beside it.
    pub fn write_for(mut self, output: &Path) -> io::Result<PathBuf> {
        let file = output
            .file_name()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?
            .to_string_lossy()
            .into_owned();
        self.outputs = vec![OutputDigest { file, sha256: sha256_file(output)? }];
        let path = manifest_path(output);
        let text = serde_json::to_string_pretty(&self).map_err(io::Error::other)?;
        fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

/// Recomputes every digest listed in a manifest; returns the files that no
/// longer match (or are missing).
pub fn verify_manifest(path: &Path) -> io::Result<Vec<String>> {
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(path)?).map_err(io::Error::other)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut bad = Vec::new();
    for out in &manifest.outputs {
        match sha256_file(&dir.join(&out.file)) {
            Ok(d) if d == out.sha256 => {}
            _ => bad.push(out.file.clone()),
        }
    }
    Ok(bad)
}
