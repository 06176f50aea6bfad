//! Run manifests: every command leaves a record of its config digest,
//! seeds, and the content digests of inputs and outputs. Only the
//! timestamp may differ between identical reruns.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{io_runtime, CliError};

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_digest: String,
    pub seeds: BTreeMap<String, u64>,
    pub threads: usize,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub timestamp_unix: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn digest_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_runtime("digesting file", e))?;
    Ok(sha256_hex(&bytes))
}

pub struct ManifestBuilder {
    command: String,
    config_digest: String,
    seeds: BTreeMap<String, u64>,
    threads: usize,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl ManifestBuilder {
    pub fn new(command: &str, config_text: &str, seeds: BTreeMap<String, u64>, threads: usize) -> Self {
        ManifestBuilder {
            command: command.into(),
            config_digest: sha256_hex(config_text.as_bytes()),
            seeds,
            threads,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs
            .insert(path.display().to_string(), digest_file(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> Result<(), CliError> {
        self.outputs
            .insert(path.display().to_string(), digest_file(path)?);
        Ok(())
    }

    /// Finish and write `<target>` as JSON.
    pub fn write(self, target: &Path) -> Result<(), CliError> {
        let manifest = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: self.config_digest,
            seeds: self.seeds,
            threads: self.threads,
            inputs: self.inputs,
            outputs: self.outputs,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::runtime(format!("manifest serialization: {e}")))?;
        std::fs::write(target, json).map_err(|e| io_runtime("writing manifest", e))?;
        Ok(())
    }
}

/// Manifest path convention: `<file>.manifest.json` for single outputs.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut name = output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    name.push_str(".manifest.json");
    output.with_file_name(name)
}

/// Thread count: flag, then MTF_THREADS, then 1.
pub fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("MTF_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(1)
}
