//! The named ablation conditions and the design matrices they induce.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::ChannelId;
use crate::model::{Routing, EMISSION_COLUMN};
use crate::signals::{family_mapping, ColumnKind, FeatureSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubset {
    /// The 52-column non-identity pool.
    NonIdentity,
    Empty,
    Emission,
    Clamp,
    Steric,
    Hydrophobic,
    /// Steric and hydrophobic non-identity enrichment, no clamp columns.
    Enrichment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    TrueY,
    ShuffledY,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    None,
    BandMean,
    EmissionOnly,
    V54Only,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationCondition {
    /// Short identifier used on the command line and in seed derivation.
    pub key: String,
    pub name: String,
    pub subset: FeatureSubset,
    pub routing: Routing,
    pub target: Target,
    pub baseline: Baseline,
}

impl AblationCondition {
    fn new(key: &str, name: &str, subset: FeatureSubset, routing: Routing, target: Target, baseline: Baseline) -> Self {
        Self {
            key: key.into(),
            name: name.into(),
            subset,
            routing,
            target,
            baseline,
        }
    }

    /// The nine conditions of the ablation table, in reporting order.
    pub fn all() -> Vec<Self> {
        use Baseline as B;
        use FeatureSubset as F;
        use Routing::{BandSpecific as Band, Global};
        use Target::{ShuffledY as Shuffled, TrueY as True};
        vec![
            Self::new("shuffle", "Shuffle QY labels", F::NonIdentity, Band, Shuffled, B::None),
            Self::new("band_mean", "Band mean", F::Empty, Band, True, B::BandMean),
            Self::new("emission_only", "Emission maximum only", F::Emission, Global, True, B::EmissionOnly),
            Self::new("global", "Global 52-feature model", F::NonIdentity, Global, True, B::None),
            Self::new("v54_only", "V54 clamp only", F::Clamp, Band, True, B::V54Only),
            Self::new("steric_only", "Steric-channel only, no clamp", F::Steric, Band, True, B::None),
            Self::new("hydrophobic_only", "Hydrophobic-channel only, no clamp", F::Hydrophobic, Band, True, B::None),
            Self::new("enrichment_only", "Enrichment only, no clamp", F::Enrichment, Band, True, B::None),
            Self::new("full", "Full pre-specified mechanism model", F::NonIdentity, Band, True, B::None),
        ]
    }

    pub fn by_key(key: &str) -> Result<Self> {
        Self::all()
            .into_iter()
            .find(|c| c.key == key || c.name == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown condition `{key}`")))
    }

    pub fn full() -> Self {
        Self::by_key("full").expect("built-in condition")
    }

    /// Column names this condition may select from.
    pub fn columns(&self, schema: &FeatureSchema) -> Vec<String> {
        let channel_of = |c: &str| match FeatureSchema::kind(c) {
            Some(ColumnKind::Enrichment { channel, .. }) => Some(channel),
            _ => None,
        };
        let pool = schema.nonid_columns.iter();
        match self.subset {
            FeatureSubset::NonIdentity => pool.cloned().collect(),
            FeatureSubset::Empty => Vec::new(),
            FeatureSubset::Emission => vec![EMISSION_COLUMN.to_string()],
            FeatureSubset::Clamp => pool
                .filter(|c| matches!(FeatureSchema::kind(c), Some(ColumnKind::Clamp(_))))
                .cloned()
                .collect(),
            FeatureSubset::Steric => pool.filter(|c| channel_of(c) == Some(ChannelId::Steric)).cloned().collect(),
            FeatureSubset::Hydrophobic => pool
                .filter(|c| channel_of(c) == Some(ChannelId::Hydrophobic))
                .cloned()
                .collect(),
            FeatureSubset::Enrichment => pool.filter(|c| channel_of(c).is_some()).cloned().collect(),
        }
    }

    pub fn feature_count(&self) -> usize {
        self.columns(&family_mapping()).len()
    }

    pub fn design(&self, ds: &Dataset) -> Result<Design> {
        let columns = self.columns(&family_mapping());
        let sources = columns
            .iter()
            .map(|c| {
                if c == EMISSION_COLUMN {
                    Ok(Source::Emission)
                } else {
                    ds.column_index(c)
                        .map(Source::Candidate)
                        .ok_or_else(|| Error::UnknownColumn(c.clone()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Design { columns, sources })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Candidate(usize),
    Emission,
}

/// Where each model input column comes from.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub columns: Vec<String>,
    pub sources: Vec<Source>,
}

impl Design {
    pub fn row_from(&self, candidate: &[f64], emission_nm: f64) -> Vec<f64> {
        self.sources
            .iter()
            .map(|s| match *s {
                Source::Candidate(j) => candidate[j],
                Source::Emission => emission_nm,
            })
            .collect()
    }

    pub fn row(&self, ds: &Dataset, i: usize) -> Vec<f64> {
        self.row_from(&ds.x[i], ds.emission_nm[i])
    }

    pub fn rows(&self, ds: &Dataset, idx: &[usize]) -> Vec<Vec<f64>> {
        idx.iter().map(|&i| self.row(ds, i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_conditions_with_table_counts() {
        let counts: Vec<usize> = AblationCondition::all().iter().map(|c| c.feature_count()).collect();
        assert_eq!(counts, vec![52, 0, 1, 52, 7, 21, 24, 45, 52]);
    }

    #[test]
    fn lookup_by_key_or_name() {
        assert_eq!(AblationCondition::by_key("v54_only").unwrap().subset, FeatureSubset::Clamp);
        assert_eq!(AblationCondition::by_key("Band mean").unwrap().baseline, Baseline::BandMean);
        assert!(AblationCondition::by_key("nope").is_err());
    }

    #[test]
    fn design_pulls_emission_and_candidates() {
        let mut ds = Dataset::empty();
        let width = ds.columns.len();
        ds.push("a".into(), "MSKGE".into(), 511.0, 0.5, (0..width).map(|j| j as f64).collect());
        let em = AblationCondition::by_key("emission_only").unwrap().design(&ds).unwrap();
        assert_eq!(em.row(&ds, 0), vec![511.0]);
        let clamp = AblationCondition::by_key("v54_only").unwrap().design(&ds).unwrap();
        assert_eq!(clamp.row(&ds, 0), (114..121).map(|j| j as f64).collect::<Vec<_>>());
    }
}
