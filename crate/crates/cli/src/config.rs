//! Optional JSON configuration file.
//!
//! Precedence everywhere is: command-line flag > config file > built-in
//! default. Every subcommand echoes its resolved configuration into the
//! artifacts it writes so runs are reconstructible.

use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub pair: PairSection,
    #[serde(default)]
    pub extract: ExtractSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub evaluate: EvaluateSection,
    #[serde(default)]
    pub simulate: SimulateSection,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSection {
    pub window_min: Option<f64>,
    pub window_max: Option<f64>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractSection {
    pub allow_missing: Option<bool>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub trees: Option<usize>,
    pub mtry: Option<usize>,
    pub min_split: Option<usize>,
    pub max_depth: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateSection {
    pub folds: Option<usize>,
    pub repetitions: Option<usize>,
    pub trees: Option<usize>,
    pub mtry: Option<usize>,
    pub min_split: Option<usize>,
    pub max_depth: Option<usize>,
    pub seed: Option<u64>,
    pub stratified: Option<bool>,
    pub group_pairs: Option<bool>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub seed: Option<u64>,
    pub led_min: Option<f64>,
    pub led_max: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> medresponse_core::Result<FileConfig> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    medresponse_core::Error::Input(format!("cannot read config {}: {e}", p.display()))
                })?;
                serde_json::from_str(&text).map_err(|e| {
                    medresponse_core::Error::Input(format!("invalid config {}: {e}", p.display()))
                })
            }
        }
    }
}
