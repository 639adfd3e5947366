//! Provenance record written next to every output file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(Self {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub seed: Option<u64>,
    pub threads: usize,
    pub wall_time_secs: f64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

/// Collects inputs and outputs while a command runs.
pub struct ManifestBuilder {
    started: Instant,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl ManifestBuilder {
    pub fn start(seed: Option<u64>) -> Self {
        Self {
            started: Instant::now(),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    /// Writes `<stem>.manifest.json` beside `primary` and returns its path.
    pub fn finish(self, primary: &Path) -> Result<PathBuf> {
        let digests = |paths: &[PathBuf]| paths.iter().map(|p| FileDigest::of(p)).collect::<Result<Vec<_>>>();
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: std::env::args().collect(),
            seed: self.seed,
            threads: rayon::current_num_threads(),
            wall_time_secs: self.started.elapsed().as_secs_f64(),
            inputs: digests(&self.inputs)?,
            outputs: digests(&self.outputs)?,
        };
        let path = manifest_path(primary);
        write_file(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(path)
    }
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    let stem = primary.file_stem().map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned());
    primary.with_file_name(format!("{stem}.manifest.json"))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
