//! Reproducibility sidecar written into every output directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cromech_core::dataset::file_hash;
use cromech_core::{family_mapping, RunConfig};
use serde::{Deserialize, Serialize};

use crate::error::{io, Result};

pub const SIDECAR_FILE: &str = "run.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSidecar {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub schema_hash: String,
    pub seed_table_hash: String,
    /// SHA-256 of every input file, keyed by role.
    pub inputs: BTreeMap<String, String>,
    /// Extra command options that are not part of the config (condition, bucket...).
    pub options: BTreeMap<String, String>,
    pub config: RunConfig,
}

impl RunSidecar {
    pub fn new(command: &str, cfg: &RunConfig, seed_table_hash: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash: cfg.hash(),
            schema_hash: family_mapping().hash(),
            seed_table_hash: seed_table_hash.into(),
            inputs: BTreeMap::new(),
            options: BTreeMap::new(),
            config: cfg.clone(),
        }
    }

    pub fn input(mut self, role: &str, path: &Path) -> Result<Self> {
        self.inputs.insert(role.into(), file_hash(path)?);
        Ok(self)
    }

    pub fn option(mut self, key: &str, value: impl ToString) -> Self {
        self.options.insert(key.into(), value.to_string());
        self
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(SIDECAR_FILE);
        let json = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, json).map_err(|e| io(&path, e))?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(SIDECAR_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
