//! Run manifests: enough metadata alongside every output to reproduce
//! the run exactly.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

#[derive(Debug, serde::Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    /// SHA-256 of every input file, keyed by path as given.
    pub input_hashes: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            config,
            input_hashes: BTreeMap::new(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }

    pub fn hash_input<P: AsRef<Path>>(&mut self, path: P) -> std::io::Result<()> {
        let bytes = std::fs::read(path.as_ref())?;
        let digest = Sha256::digest(&bytes);
        self.input_hashes
            .insert(path.as_ref().display().to_string(), hex::encode(digest));
        Ok(())
    }

    pub fn write<P: AsRef<Path>>(&self, out_dir: P) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(out_dir.as_ref().join("manifest.json"), json + "\n")
    }
}
