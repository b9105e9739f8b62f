use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wrom::stochastics::streams;

use crate::config::RunConfig;
use crate::error::CliError;

pub const FILE_NAME: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub seed: u64,
    pub training_stream: u64,
    pub greedy_pool_stream: u64,
    pub evaluation_stream: u64,
}

impl Seeds {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            training_stream: streams::TRAINING,
            greedy_pool_stream: streams::GREEDY_POOL,
            evaluation_stream: streams::EVALUATION,
        }
    }
}

/// Record written beside every run's outputs; `wrom replay` re-executes it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub threads: usize,
    /// Output files relative to the manifest directory.
    pub outputs: Vec<String>,
    pub seeds: Seeds,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    #[serde(default)]
    pub results: BTreeMap<String, String>,
    pub config: RunConfig,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text = toml::to_string(self).map_err(|e| CliError::Config(format!("cannot serialize manifest: {e}")))?;
        std::fs::write(dir.join(FILE_NAME), text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }
}
