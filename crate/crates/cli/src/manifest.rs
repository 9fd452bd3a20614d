//! Per-invocation run manifest.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::{CliResult, RunContext};

/// Everything needed to rerun an invocation. Outputs depend only on the
/// config hash, seed and arguments; the timestamps are informational.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
    pub kind: Option<String>,
    /// Named shot counts (per experiment, per point, per process setting...).
    pub shots: Vec<(String, usize)>,
    pub outputs: Vec<PathBuf>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

pub fn now_unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

impl RunManifest {
    pub fn start(command: &str, ctx: &RunContext) -> Self {
        Self {
            command: command.into(),
            config_hash: ctx.config_hash.clone(),
            config_path: ctx.config_path.clone(),
            seed: ctx.seed,
            kind: None,
            shots: Vec::new(),
            outputs: Vec::new(),
            started_unix_ms: now_unix_ms(),
            finished_unix_ms: 0,
        }
    }

    pub fn shots(mut self, name: &str, n: usize) -> Self {
        self.shots.push((name.into(), n));
        self
    }

    /// Stamp the finish time and write `manifest-<command>.json` into `dir`.
    pub fn finish(mut self, dir: &Path) -> CliResult<PathBuf> {
        self.finished_unix_ms = now_unix_ms();
        let path = dir.join(format!("manifest-{}.json", self.command));
        let mut body = serde_json::to_string_pretty(&self)?;
        body.push('\n');
        std::fs::write(&path, body)?;
        Ok(path)
    }
}
