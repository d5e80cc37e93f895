//! Per-run artifact bundle: files written under one output directory, each
//! digested, summarized in a `manifest.json` that pins the configuration,
//! input digests, output digests, and metric summary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// 64-bit FNV-1a content digest.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn digest_string(bytes: &[u8]) -> String {
    format!("{:016x}", fnv1a64(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub digest: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentManifest {
    pub kind: String,
    pub tool_version: String,
    pub config: BTreeMap<String, serde_json::Value>,
    pub input_digests: BTreeMap<String, String>,
    pub outputs: Vec<OutputFile>,
    pub metrics: BTreeMap<String, f64>,
}

/// Output directory in progress; every write records a digest entry.
pub struct RunDir {
    root: PathBuf,
    outputs: Vec<OutputFile>,
}

impl RunDir {
    pub fn create<P: AsRef<Path>>(root: P) -> Result<Self> {
        fs::create_dir_all(root.as_ref())?;
        Ok(RunDir {
            root: root.as_ref().to_path_buf(),
            outputs: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.outputs.push(OutputFile {
            path: rel.to_string(),
            digest: digest_string(bytes),
        });
        Ok(())
    }

    /// Write `manifest.json` and return the manifest.
    pub fn finish(
        self,
        kind: &str,
        config: BTreeMap<String, serde_json::Value>,
        input_digests: BTreeMap<String, String>,
        metrics: BTreeMap<String, f64>,
    ) -> Result<ExperimentManifest> {
        let manifest = ExperimentManifest {
            kind: kind.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            input_digests,
            outputs: self.outputs,
            metrics,
        };
        let json = serde_json::to_string_pretty(&manifest)?;
        fs::write(self.root.join("manifest.json"), json)?;
        Ok(manifest)
    }
}
