// SPDX-License-Identifier: Apache-2.0

//! Per-stage manifests: resolved settings, input digests and output digests.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    /// As given on the command line for inputs; relative to the stage
    /// directory for outputs.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub stage_seed: u64,
    pub config: PipelineConfig,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Headline counts and metrics of the run.
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub summary: serde_json::Map<String, serde_json::Value>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn digest(name: &str, shown: &str, actual: &Path) -> Result<FileDigest, CliError> {
    Ok(FileDigest {
        name: name.to_string(),
        path: shown.to_string(),
        sha256: sha256_file(actual)?,
    })
}

pub fn manifest_file(stage: &str) -> String {
    format!("{stage}.manifest.json")
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(dir.join(manifest_file(&self.stage)), text)?;
        Ok(())
    }

    pub fn read(dir: &Path, stage: &str) -> Result<Manifest, CliError> {
        let path = dir.join(manifest_file(stage));
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn input(&self, name: &str) -> Option<&FileDigest> {
        self.inputs.iter().find(|d| d.name == name)
    }
}
