//! Run manifests written next to each output artifact.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lexmask_core::{Error, Result};
use serde::Serialize;

use crate::io::{sha256_bytes, sha256_file};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// Fully resolved settings; rerunning with these reproduces `output`.
    pub config: serde_json::Value,
    pub config_sha256: String,
    pub inputs: Vec<FileDigest>,
    pub output: FileDigest,
    pub counts: BTreeMap<&'static str, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Hashes inputs and output and writes `<output>.manifest.json`.
pub fn write_manifest<C: Serialize>(
    command: &'static str,
    config: &C,
    inputs: &[&Path],
    output: &Path,
    counts: BTreeMap<&'static str, u64>,
    seed: Option<u64>,
) -> Result<()> {
    let config = serde_json::to_value(config).expect("config serializes");
    let config_sha256 = sha256_bytes(config.to_string().as_bytes());
    let digest = |p: &Path| -> Result<FileDigest> {
        Ok(FileDigest {
            path: p.display().to_string(),
            sha256: sha256_file(p)?,
        })
    };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        config_sha256,
        inputs: inputs.iter().map(|p| digest(p)).collect::<Result<_>>()?,
        output: digest(output)?,
        counts,
        seed,
    };
    let path = manifest_path(output);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}
