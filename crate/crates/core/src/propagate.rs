//! Chromophore-local message passing and region-weighted readout.
//!
//! Each activated channel runs a fixed number of synchronous updates
//!
//! ```text
//! h_u <- (h_u + sum_v w_uv * alpha_u * h_v) / (1 + 0.1 * sum_v w_uv * alpha_u)
//! ```
//!
//! starting from the residue seed vectors, where every step reads only the previous
//! step's states. The propagated states are then read out at each chromophore region as
//! a `beta`-weighted mean over nodes whose weight exceeds the support threshold.

use serde::{Deserialize, Serialize};

use crate::chromophore::{
    anchor_chromophore, clamp_descriptors, ChromophoreConfig, CroAnchor, MaturationState, Region,
};
use crate::error::{Error, Result};
use crate::graph::{build_graph, ChannelId, GraphConfig, MechanismGraph};
use crate::ingest::Structure;
use crate::signals::{family_mapping, FeatureSchema, SeedTable, SeedVector, N_SIGNALS};

pub const PROPAGATION_STEPS: usize = 2;
pub const DAMPING: f64 = 0.1;
pub const BETA_THRESHOLD: f64 = 0.05;
pub const EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub steps: usize,
    pub beta_threshold: f64,
    pub epsilon: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            steps: PROPAGATION_STEPS,
            beta_threshold: BETA_THRESHOLD,
            epsilon: EPSILON,
        }
    }
}

/// Everything that parameterises featurization of one structure.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub chromophore: ChromophoreConfig,
    pub graph: GraphConfig,
    pub propagation: PropagationConfig,
}

/// Run `steps` synchronous updates on one channel; returns per-node states.
pub fn propagate_channel(
    g: &MechanismGraph,
    st: &SeedTable,
    ch: ChannelId,
    steps: usize,
) -> Vec<SeedVector> {
    let adj = g.adjacency(ch);
    let mut states: Vec<SeedVector> = g.nodes.iter().map(|n| st.seed_vector(&n.aa3)).collect();
    for _ in 0..steps {
        let next = adj
            .iter()
            .zip(&g.nodes)
            .enumerate()
            .map(|(u, (neighbours, node))| {
                let mut num = states[u];
                let mut weight_sum = 0.0;
                for &(v, w) in neighbours {
                    let coupling = w * node.alpha;
                    weight_sum += coupling;
                    for (acc, hv) in num.iter_mut().zip(&states[v]) {
                        *acc += coupling * hv;
                    }
                }
                let den = 1.0 + DAMPING * weight_sum;
                num.map(|x| x / den)
            })
            .collect();
        states = next;
    }
    states
}

/// `beta`-weighted mean of node states at one region, over nodes with `beta > threshold`.
/// An empty support set reads out as zeros.
pub fn region_readout(
    states: &[SeedVector],
    g: &MechanismGraph,
    region: Region,
    cfg: &PropagationConfig,
) -> SeedVector {
    let mut num = [0.0; N_SIGNALS];
    let mut den = 0.0;
    for (h, node) in states.iter().zip(&g.nodes) {
        let beta = node.beta[region.index()];
        if beta > cfg.beta_threshold {
            den += beta;
            for (acc, x) in num.iter_mut().zip(h) {
                *acc += beta * x;
            }
        }
    }
    num.map(|x| x / (den + cfg.epsilon))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub protein_id: String,
    /// Ordered as `FeatureSchema::candidate_columns`.
    pub values: Vec<f64>,
    pub schema_hash: String,
    pub maturation_state: MaturationState,
    /// Set when no residue fell inside the locality radius; enrichment is then all zero.
    pub empty_neighbourhood: bool,
    pub missing_regions: Vec<Region>,
}

impl FeatureVector {
    pub fn enrichment(&self) -> &[f64] {
        &self.values[..FeatureSchema::N_ENRICHMENT]
    }

    pub fn clamps(&self) -> &[f64] {
        &self.values[FeatureSchema::N_ENRICHMENT..]
    }
}

/// Assemble the 121-value candidate vector: steric then hydrophobic enrichment, each
/// ordered region-major and signal-minor, followed by the seven clamp descriptors.
pub fn featurize(s: &Structure, a: &CroAnchor, st: &SeedTable, cfg: &FeatureConfig) -> FeatureVector {
    let mut values = Vec::with_capacity(FeatureSchema::N_CANDIDATE);
    let empty_neighbourhood = match build_graph(s, a, &cfg.graph) {
        Ok(g) => {
            for ch in ChannelId::ACTIVATED {
                let states = propagate_channel(&g, st, ch, cfg.propagation.steps);
                for region in Region::ALL {
                    values.extend(region_readout(&states, &g, region, &cfg.propagation));
                }
            }
            false
        }
        Err(Error::EmptyLocalNeighbourhood) => {
            values.resize(FeatureSchema::N_ENRICHMENT, 0.0);
            true
        }
        Err(e) => unreachable!("build_graph only fails on an empty neighbourhood: {e}"),
    };
    values.extend(clamp_descriptors(s, a).values);
    FeatureVector {
        protein_id: s.id.clone(),
        values,
        schema_hash: family_mapping().hash(),
        maturation_state: a.maturation_state,
        empty_neighbourhood,
        missing_regions: a.missing_regions.clone(),
    }
}

/// Register the chromophore and featurize in one call.
pub fn featurize_structure(s: &Structure, st: &SeedTable, cfg: &FeatureConfig) -> Result<FeatureVector> {
    let anchor = anchor_chromophore(s, &cfg.chromophore)?;
    Ok(featurize(s, &anchor, st, cfg))
}
