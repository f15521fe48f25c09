use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliResult;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Provenance of one command invocation. `config` is the fully resolved
/// configuration and can be passed back through `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub threads: usize,
    pub config: Value,
    pub outputs: Vec<PathBuf>,
    pub complete: bool,
    pub wall_time_seconds: Option<f64>,
}

/// Writes the manifest up front and completes it once the results exist.
pub struct ManifestGuard {
    manifest: RunManifest,
    path: PathBuf,
    started: Instant,
}

impl ManifestGuard {
    pub fn begin(out: &Path, command: &str, seed: u64, config: &impl Serialize, outputs: &[&str]) -> CliResult<Self> {
        std::fs::create_dir_all(out)?;
        let manifest = RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            threads: rayon::current_num_threads(),
            config: serde_json::to_value(config)?,
            outputs: outputs.iter().map(|f| out.join(f)).collect(),
            complete: false,
            wall_time_seconds: None,
        };
        let guard = Self { manifest, path: out.join(MANIFEST_FILE), started: Instant::now() };
        guard.write()?;
        Ok(guard)
    }

    fn write(&self) -> CliResult<()> {
        std::fs::write(&self.path, serde_json::to_string_pretty(&self.manifest)? + "\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> CliResult<RunManifest> {
        self.manifest.complete = true;
        self.manifest.wall_time_seconds = Some(self.started.elapsed().as_secs_f64());
        self.write()?;
        Ok(self.manifest)
    }
}

pub fn read_manifest(out: &Path) -> CliResult<RunManifest> {
    Ok(serde_json::from_str(&std::fs::read_to_string(out.join(MANIFEST_FILE))?)?)
}
