//! Run manifests: every command records its resolved configuration,
//! seed, code version and output list, so any run can be replayed
//! bit-exactly from the manifest alone.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::Config;
use crate::error::{Result, SimError};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub master_seed: u64,
    pub config: Config,
    pub duration_secs: f64,
    pub outputs: Vec<String>,
}

/// Collects output paths while a command runs and writes `manifest.json`
/// at the end.
pub struct ManifestBuilder {
    command: String,
    config: Config,
    started: Instant,
    outputs: Vec<String>,
}

impl ManifestBuilder {
    pub fn new(command: &str, config: &Config) -> Self {
        ManifestBuilder {
            command: command.to_string(),
            config: config.clone(),
            started: Instant::now(),
            outputs: Vec::new(),
        }
    }

    /// Registers an output file (relative to the out dir).
    pub fn output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    pub fn write(mut self, out_dir: &Path) -> Result<PathBuf> {
        self.outputs.sort();
        let manifest = RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: self.config.master_seed,
            config: self.config,
            duration_secs: self.started.elapsed().as_secs_f64(),
            outputs: self.outputs,
        };
        let path = out_dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| SimError::Config(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, text + "\n").map_err(|e| SimError::io(&path, e))?;
        Ok(path)
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))
}
