//! Run manifests and atomic file writes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::Result;

/// Write `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    /// File name of the stored config copy.
    pub config_file: String,
    pub library_version: String,
    pub task: String,
    pub seed: u64,
    pub tol: f64,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
    pub stats: BTreeMap<String, serde_json::Value>,
    pub warnings: Vec<String>,
    /// Exit status the run ended with.
    pub status: i32,
}

impl RunManifest {
    pub fn new(config_text: &str, task: &str, seed: u64, tol: f64) -> Self {
        Self {
            config_hash: sha256_hex(config_text.as_bytes()),
            config_file: "config.toml".into(),
            library_version: env!("CARGO_PKG_VERSION").into(),
            task: task.into(),
            seed,
            tol,
            started: now(),
            finished: String::new(),
            outputs: Vec::new(),
            stats: BTreeMap::new(),
            warnings: Vec::new(),
            status: 0,
        }
    }

    pub fn stat(&mut self, key: &str, value: impl Serialize) {
        self.stats.insert(key.into(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
    }

    /// Stamp the end time and write `manifest.json` into `dir`.
    pub fn finish(&mut self, dir: &Path) -> Result<()> {
        self.finished = now();
        let text = serde_json::to_string_pretty(self).map_err(|e| crate::Error::Numerical(e.to_string()))?;
        write_atomic(&dir.join("manifest.json"), text.as_bytes())
    }

    /// Whether the stored config in `dir` still hashes to `config_hash`.
    pub fn verify(&self, dir: &Path) -> Result<bool> {
        Ok(sha256_hex(&fs::read(dir.join(&self.config_file))?) == self.config_hash)
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_hash_verifies() {
        let d = tempfile::tempdir().unwrap();
        let text = "a = 1\n";
        write_atomic(&d.path().join("config.toml"), text.as_bytes()).unwrap();
        let mut m = RunManifest::new(text, "validate", 0, 1e-10);
        m.finish(d.path()).unwrap();
        let back: RunManifest = serde_json::from_slice(&fs::read(d.path().join("manifest.json")).unwrap()).unwrap();
        assert!(back.verify(d.path()).unwrap());
        write_atomic(&d.path().join("config.toml"), b"a = 2\n").unwrap();
        assert!(!back.verify(d.path()).unwrap());
    }
}
