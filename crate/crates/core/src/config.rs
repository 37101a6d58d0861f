//! Run configuration shared by every pipeline command.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chromophore::ChromophoreConfig;
use crate::error::{Error, Result};
use crate::graph::{GraphConfig, EDGE_CUTOFF, LOCALITY_RADIUS};
use crate::model::{EtRegressorConfig, TOP_K_FEATURES};
use crate::propagate::{FeatureConfig, PropagationConfig, BETA_THRESHOLD, EPSILON, PROPAGATION_STEPS};
use crate::signals::sha256_hex;

pub const JACCARD_TAU: f64 = 0.85;
pub const SCREENING_K: [usize; 5] = [5, 10, 15, 20, 25];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub metadata: Option<PathBuf>,
    pub structures: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Replacement seed table; the bundled table is used when absent.
    pub seed_table: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StressConfig {
    pub noise_sigmas: Vec<f64>,
    pub dropout_rates: Vec<f64>,
    pub bad_structure_fraction: f64,
    pub bad_structure_sigma: f64,
    pub bootstrap_resamples: usize,
}

impl Default for StressConfig {
    fn default() -> Self {
        Self {
            noise_sigmas: vec![0.10, 0.20, 0.30],
            dropout_rates: vec![0.10, 0.20],
            bad_structure_fraction: 0.20,
            bad_structure_sigma: 0.30,
            bootstrap_resamples: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub seeds: Vec<u64>,
    pub folds: usize,
    pub locality_radius: f64,
    pub edge_cutoff: f64,
    pub propagation_steps: usize,
    pub beta_threshold: f64,
    pub epsilon: f64,
    pub hetero_codes: Vec<String>,
    pub top_k_features: usize,
    pub et: EtRegressorConfig,
    pub screening_k: Vec<usize>,
    pub jaccard_tau: f64,
    pub stress: StressConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            seeds: (0..5).collect(),
            folds: 5,
            locality_radius: LOCALITY_RADIUS,
            edge_cutoff: EDGE_CUTOFF,
            propagation_steps: PROPAGATION_STEPS,
            beta_threshold: BETA_THRESHOLD,
            epsilon: EPSILON,
            hetero_codes: ChromophoreConfig::default().hetero_codes,
            top_k_features: TOP_K_FEATURES,
            et: EtRegressorConfig::default(),
            screening_k: SCREENING_K.to_vec(),
            jaccard_tau: JACCARD_TAU,
            stress: StressConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if self.folds < 2 {
            return bad("folds must be at least 2");
        }
        if self.et.n_trees == 0 {
            return bad("et.n_trees must be at least 1");
        }
        if self.top_k_features == 0 {
            return bad("top_k_features must be at least 1");
        }
        if !(self.locality_radius > 0.0 && self.edge_cutoff > 0.0) {
            return bad("locality_radius and edge_cutoff must be positive");
        }
        if !(0.0..=1.0).contains(&self.jaccard_tau) {
            return bad("jaccard_tau must lie in [0, 1]");
        }
        if self.screening_k.contains(&0) {
            return bad("screening K values must be positive");
        }
        Ok(())
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            chromophore: ChromophoreConfig {
                hetero_codes: self.hetero_codes.clone(),
            },
            graph: GraphConfig {
                locality_radius: self.locality_radius,
                edge_cutoff: self.edge_cutoff,
            },
            propagation: PropagationConfig {
                steps: self.propagation_steps,
                beta_threshold: self.beta_threshold,
                epsilon: self.epsilon,
            },
        }
    }

    /// SHA-256 of the canonical JSON form, excluding filesystem paths.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.paths = Paths::default();
        sha256_hex(&serde_json::to_vec(&canonical).expect("config serializes"))
    }
}
