//! Run manifests: resolved configuration, seeds, tolerances, version,
//! wall-clock time, and SHA-256 digests of every emitted file.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub artifact_version: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub tol: f64,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputDigest>,
}

/// Collects output files for one run and writes the manifest last.
pub struct RunWriter {
    out_dir: PathBuf,
    subcommand: String,
    config: serde_json::Value,
    seeds: Vec<u64>,
    tol: f64,
    started: Instant,
    outputs: Vec<OutputDigest>,
}

impl RunWriter {
    pub fn new<C: Serialize>(
        out_dir: &Path,
        subcommand: &str,
        config: &C,
        seeds: Vec<u64>,
        tol: f64,
    ) -> Result<Self, CliError> {
        std::fs::create_dir_all(out_dir).map_err(|e| {
            CliError::Io(format!("cannot create output dir {}: {e}", out_dir.display()))
        })?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            subcommand: subcommand.to_string(),
            config: serde_json::to_value(config).expect("config serializes"),
            seeds,
            tol,
            started: Instant::now(),
            outputs: Vec::new(),
        })
    }

    /// Writes one output file and records its digest.
    pub fn write_file(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        let digest = Sha256::digest(contents);
        self.outputs.push(OutputDigest {
            file: name.to_string(),
            sha256: hex::encode(digest),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Io(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write_file(name, text.as_bytes())
    }

    /// Writes `manifest.json` and returns the manifest.
    pub fn finish(self) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            subcommand: self.subcommand,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            config: self.config,
            seeds: self.seeds,
            tol: self.tol,
            workers: rayon::current_num_threads(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            outputs: self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Io(format!("cannot serialize manifest: {e}")))?;
        text.push('\n');
        let path = self.out_dir.join("manifest.json");
        std::fs::write(&path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        Ok(manifest)
    }
}
