use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

pub fn build_id() -> String {
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    format!("{} {} ({profile})", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// Relative to the output directory.
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub subcommand: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub build: String,
    /// Seconds since the Unix epoch at start.
    pub started_at: u64,
    pub wall_clock_seconds: f64,
    pub workers: usize,
    pub outputs: Vec<OutputRecord>,
    pub counters: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn file_name(subcommand: &str) -> String {
        format!("{subcommand}.manifest.json")
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes)?;
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

/// Output files of one run. Each file appears whole or not at all; `discard`
/// removes everything written so far.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    records: Vec<OutputRecord>,
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            records: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, file: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(file), bytes)?;
        let sha = Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect();
        self.records.retain(|r| r.file != file);
        self.records.push(OutputRecord {
            file: file.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha,
        });
        Ok(())
    }

    pub fn discard(self) {
        for r in &self.records {
            let _ = fs::remove_file(self.dir.join(&r.file));
        }
    }

    /// Writes the manifest listing every output; on failure the outputs go too.
    pub fn finish(self, mut manifest: RunManifest) -> Result<PathBuf> {
        manifest.outputs = self.records.clone();
        let path = self.dir.join(RunManifest::file_name(&manifest.subcommand));
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        match write_atomic(&path, text.as_bytes()) {
            Ok(()) => Ok(path),
            Err(e) => {
                self.discard();
                Err(e)
            }
        }
    }
}
