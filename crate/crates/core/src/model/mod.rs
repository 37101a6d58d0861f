//! Band routing, training-fold feature selection and per-band ExtraTrees models.

mod band;
mod forest;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use band::{assign_band, Band};
pub use forest::{EtRegressorConfig, ExtraTrees, Tree};

use crate::error::{Error, Result};
use crate::propagate::FeatureVector;
use crate::signals::family_mapping;
use crate::stats::{is_constant, pearson, quantile};

pub const TOP_K_FEATURES: usize = 25;
pub const MIN_BAND_ROWS: usize = 3;
/// Pseudo-column carrying the emission maximum for emission-only models.
pub const EMISSION_COLUMN: &str = "emission_nm";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub column: String,
    /// Position in the candidate column list passed to [`select_features`].
    pub index: usize,
    /// |Pearson correlation| with the target; 0 when the target is constant.
    pub score: f64,
}

/// Rank non-constant columns by |corr(column, y)|, ties broken by column name, and keep
/// the first `k`. Constant columns never enter the selection.
pub fn select_features(
    x: &[Vec<f64>],
    y: &[f64],
    columns: &[String],
    band: Band,
    k: usize,
) -> Result<Vec<RankedFeature>> {
    if y.len() < MIN_BAND_ROWS {
        return Err(Error::InsufficientBandData { band, rows: y.len() });
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!("{} rows vs {} targets", x.len(), y.len())));
    }
    let mut ranked: Vec<RankedFeature> = columns
        .iter()
        .enumerate()
        .filter_map(|(j, name)| {
            let col: Vec<f64> = x.iter().map(|row| row[j]).collect();
            if is_constant(&col) {
                return None;
            }
            Some(RankedFeature {
                column: name.clone(),
                index: j,
                score: pearson(&col, y).map_or(0.0, f64::abs),
            })
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.column.cmp(&b.column)));
    ranked.truncate(k);
    Ok(ranked)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandModel {
    /// `None` for a pooled model that ignores band routing.
    pub band: Option<Band>,
    pub selected: Vec<RankedFeature>,
    pub forest: ExtraTrees,
    pub train_q90: f64,
    pub train_q10: f64,
    pub n_train: usize,
}

impl BandModel {
    pub fn selected_columns(&self) -> impl Iterator<Item = &str> {
        self.selected.iter().map(|f| f.column.as_str())
    }

    /// Raw forest output for a full candidate row laid out like the training columns.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let x: Vec<f64> = self.selected.iter().map(|f| row[f.index]).collect();
        self.forest.predict(&x)
    }

    /// Raw forest output, resolving selected columns by name.
    pub fn predict_lookup(&self, lookup: impl Fn(&str) -> Option<f64>) -> Result<f64> {
        let x = self
            .selected
            .iter()
            .map(|f| lookup(&f.column).ok_or_else(|| Error::UnknownColumn(f.column.clone())))
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.forest.predict(&x))
    }
}

/// Select features on the training rows, then fit the forest on the selected columns.
/// Thresholds come from the same training targets.
pub fn fit_band(
    x: &[Vec<f64>],
    y: &[f64],
    columns: &[String],
    band: Option<Band>,
    top_k: usize,
    cfg: &EtRegressorConfig,
) -> Result<BandModel> {
    let selected = select_features(x, y, columns, band.unwrap_or(Band::Excluded), top_k)?;
    let reduced: Vec<Vec<f64>> = x
        .iter()
        .map(|row| selected.iter().map(|f| row[f.index]).collect())
        .collect();
    let forest = ExtraTrees::fit(&reduced, y, cfg)?;
    Ok(BandModel {
        band,
        selected,
        forest,
        train_q90: quantile(y, 0.90),
        train_q10: quantile(y, 0.10),
        n_train: y.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Routing {
    BandSpecific,
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSet {
    pub routing: Routing,
    pub models: Vec<BandModel>,
}

impl ModelSet {
    pub fn model_for(&self, emission_nm: f64) -> Result<&BandModel> {
        let band = assign_band(emission_nm);
        if !band.is_modelled() {
            return Err(Error::ExcludedBand(emission_nm));
        }
        let found = match self.routing {
            Routing::Global => self.models.first(),
            Routing::BandSpecific => self.models.iter().find(|m| m.band == Some(band)),
        };
        found.ok_or(Error::NoModelForBand(band))
    }
}

/// Route a feature vector to its band model and clip the prediction to [0, 1].
pub fn predict(models: &ModelSet, row: &FeatureVector, emission_nm: f64) -> Result<f64> {
    let schema = family_mapping();
    let model = models.model_for(emission_nm)?;
    let raw = model.predict_lookup(|name| {
        if name == EMISSION_COLUMN {
            return Some(emission_nm);
        }
        schema.candidate_index(name).map(|i| row.values[i])
    })?;
    Ok(clip_qy(raw))
}

pub fn clip_qy(raw: f64) -> f64 {
    raw.clamp(0.0, 1.0)
}

/// Self-describing serialized model bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub schema_hash: String,
    pub et_config: EtRegressorConfig,
    pub top_k: usize,
    pub models: ModelSet,
}

impl ModelFile {
    pub const FORMAT: &'static str = "cromech-band-models";

    pub fn new(models: ModelSet, et_config: EtRegressorConfig, top_k: usize) -> Self {
        Self {
            format: Self::FORMAT.into(),
            version: 1,
            schema_hash: family_mapping().hash(),
            et_config,
            top_k,
            models,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: Self = serde_json::from_str(&text)?;
        if file.format != Self::FORMAT {
            return Err(Error::InvalidConfig(format!("not a model file: {}", file.format)));
        }
        Ok(file)
    }
}
