//! Run manifest: what was run, with which settings, and what it wrote.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use chrono::{DateTime, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct FileRecord {
    /// relative to the output directory
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iteration: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub started: DateTime<Utc>,
    pub finished: Option<DateTime<Utc>>,
    pub wall_secs: Option<f64>,
    pub status: &'static str,
    pub error: Option<ErrorRecord>,
    /// chain label -> parameter -> rate
    pub acceptance: BTreeMap<String, BTreeMap<String, f64>>,
    /// anything else worth recording, e.g. recovery correlations
    pub notes: BTreeMap<String, serde_json::Value>,
    pub files: Vec<FileRecord>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            seed: None,
            config: serde_json::Value::Null,
            started: Utc::now(),
            finished: None,
            wall_secs: None,
            status: "running",
            error: None,
            acceptance: BTreeMap::new(),
            notes: BTreeMap::new(),
            files: Vec::new(),
        }
    }

    /// Checksums `paths` and adds them to the inventory.
    pub fn record(&mut self, out: &Path, paths: &[PathBuf]) -> anyhow::Result<()> {
        for p in paths {
            let bytes = std::fs::read(p).with_context(|| format!("reading {} for its checksum", p.display()))?;
            let rel = p.strip_prefix(out).unwrap_or(p);
            self.files.push(FileRecord {
                path: rel.to_string_lossy().replace('\\', "/"),
                bytes: bytes.len() as u64,
                sha256: hex::encode(Sha256::digest(&bytes)),
            });
        }
        Ok(())
    }

    pub fn finish(&mut self, error: Option<ErrorRecord>) {
        let now = Utc::now();
        self.finished = Some(now);
        self.wall_secs = Some((now - self.started).num_milliseconds() as f64 / 1000.0);
        self.status = if error.is_some() { "failed" } else { "ok" };
        self.error = error;
    }

    pub fn write(&mut self, out: &Path) -> anyhow::Result<PathBuf> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let path = out.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
