//! Run manifests: everything needed to repeat a command.
//!
//! A manifest carries no clock readings or absolute output locations, so two
//! runs with the same inputs and flags produce byte-identical manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AppError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Fully resolved configuration, defaults included.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    /// File names, relative to the manifest's directory.
    pub outputs: Vec<String>,
    pub versions: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new<C: Serialize>(command: &str, config: &C, seed: Option<u64>) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("gevmc".to_string(), env!("CARGO_PKG_VERSION").to_string());
        versions.insert("gevmc-core".to_string(), gevmc_core::VERSION.to_string());
        Self {
            command: command.to_string(),
            config: serde_json::to_value(config).expect("configs serialize to JSON"),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            versions,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    pub fn add_output(&mut self, name: impl Into<String>) {
        self.outputs.push(name.into());
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
