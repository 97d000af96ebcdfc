//! Machine-readable run reports.
//!
//! The report itself is deterministic: command, fully resolved
//! configuration, configuration hash, seed, metrics, and notes, with sorted
//! keys throughout. Wall-clock stage timings are inherently nondeterministic
//! and therefore go to a separate timings file, keeping report bytes
//! identical across reruns.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Serialize)]
pub struct MetricsReport {
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub metrics: BTreeMap<String, f64>,
    pub notes: BTreeMap<String, String>,
}

impl MetricsReport {
    pub fn new(command: &str, seed: u64, config: &impl Serialize) -> Result<Self> {
        let config = serde_json::to_value(config)
            .map_err(|e| CliError::Usage(format!("config serialization: {e}")))?;
        let canonical = serde_json::to_string(&config)
            .map_err(|e| CliError::Usage(format!("config serialization: {e}")))?;
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        let config_hash = hex_string(&h.finalize());
        Ok(MetricsReport {
            command: command.to_string(),
            seed,
            config_hash,
            config,
            metrics: BTreeMap::new(),
            notes: BTreeMap::new(),
        })
    }

    pub fn metric(&mut self, name: &str, value: f64) -> &mut Self {
        assert!(value.is_finite(), "metric {name} is not finite: {value}");
        self.metrics.insert(name.to_string(), value);
        self
    }

    pub fn note(&mut self, name: &str, value: impl Into<String>) -> &mut Self {
        self.notes.insert(name.to_string(), value.into());
        self
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Usage(format!("report serialization: {e}")))?;
        crate::io::write_atomic(path, json.as_bytes())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(2 * bytes.len());
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Wall-clock stage timings, written beside the report.
#[derive(Debug, Default, Serialize)]
pub struct Timings {
    pub stages_ms: BTreeMap<String, f64>,
}

impl Timings {
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages_ms
            .insert(stage.to_string(), start.elapsed().as_secs_f64() * 1e3);
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Usage(format!("timings serialization: {e}")))?;
        crate::io::write_atomic(path, json.as_bytes())
    }
}

/// Conventional sibling paths for a command writing into a directory.
pub fn report_paths(out_dir: &Path) -> (PathBuf, PathBuf) {
    (out_dir.join("report.json"), out_dir.join("timings.json"))
}
