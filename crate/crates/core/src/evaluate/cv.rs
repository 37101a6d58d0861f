//! Random cross-validation and fixed-split homology evaluation.
//!
//! Every (seed, fold, condition, band) cell draws its randomness from a stream derived by
//! hashing those coordinates, so results do not depend on scheduling.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ablation::{AblationCondition, Baseline, Design, Target};
use super::folds::{make_folds, FoldPlan};
use super::kmer::{Bucket, SplitPlan};
use super::metrics::MetricsReport;
use crate::config::RunConfig;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{clip_qy, fit_band, Band, BandModel, EtRegressorConfig, Routing, MIN_BAND_ROWS};
use crate::signals::sha256_hex;
use crate::stats::{mean, quantile};

/// Stream seed for one grid cell.
pub fn cell_seed(base: u64, seed: u64, scope: &str, condition: &str, band: &str) -> u64 {
    let digest = sha256_hex(format!("{base}|{seed}|{scope}|{condition}|{band}").as_bytes());
    u64::from_str_radix(&digest[..16], 16).expect("hex digest")
}

fn band_label(band: Option<Band>) -> &'static str {
    band.map_or("global", Band::name)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    Forest(BandModel),
    Mean(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitFit {
    /// `None` for a pooled model.
    pub band: Option<Band>,
    pub n_train: usize,
    pub selected: Vec<String>,
    pub predictor: Predictor,
}

impl UnitFit {
    pub fn predict(&self, row: &[f64]) -> f64 {
        match &self.predictor {
            Predictor::Forest(m) => clip_qy(m.predict_row(row)),
            Predictor::Mean(v) => clip_qy(*v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub seed: u64,
    pub scope: String,
    pub band: String,
    pub reason: String,
}

/// Everything fitted on one training partition.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldFit {
    pub seed: u64,
    pub scope: String,
    pub routing: Routing,
    /// Bright / dark thresholds from the training partition's true targets.
    pub q90: f64,
    pub q10: f64,
    pub units: Vec<UnitFit>,
    pub skipped: Vec<SkippedCell>,
}

impl FoldFit {
    pub fn unit_for(&self, band: Band) -> Option<&UnitFit> {
        match self.routing {
            Routing::Global => self.units.first(),
            Routing::BandSpecific => self.units.iter().find(|u| u.band == Some(band)),
        }
    }

    pub fn predict(&self, design_row: &[f64], band: Band) -> Option<f64> {
        self.unit_for(band).map(|u| u.predict(design_row))
    }

    /// Selected columns per unit, keyed by band label.
    pub fn selections(&self) -> BTreeMap<&'static str, Vec<String>> {
        self.units.iter().map(|u| (band_label(u.band), u.selected.clone())).collect()
    }
}

/// Fit one condition on the rows `train` of a band-assigned dataset.
pub fn fit_partition(
    ds: &Dataset,
    design: &Design,
    cond: &AblationCondition,
    train: &[usize],
    seed: u64,
    scope: &str,
    cfg: &RunConfig,
) -> FoldFit {
    let y_true: Vec<f64> = train.iter().map(|&i| ds.qy[i]).collect();
    let mut y_fit = y_true.clone();
    if cond.target == Target::ShuffledY {
        let s = cell_seed(cfg.et.rng_seed, seed, scope, &cond.key, "shuffle");
        y_fit.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
    }
    let groups: Vec<(Option<Band>, Vec<usize>)> = match cond.routing {
        Routing::Global => vec![(None, (0..train.len()).collect())],
        Routing::BandSpecific => Band::MODELLED
            .into_iter()
            .map(|b| (Some(b), (0..train.len()).filter(|&k| ds.band(train[k]) == b).collect()))
            .collect(),
    };

    let mut units = Vec::new();
    let mut skipped = Vec::new();
    for (band, local) in groups {
        let skip = |reason: String| SkippedCell {
            seed,
            scope: scope.to_string(),
            band: band_label(band).to_string(),
            reason,
        };
        if local.len() < MIN_BAND_ROWS {
            let err = Error::InsufficientBandData {
                band: band.unwrap_or(Band::Excluded),
                rows: local.len(),
            };
            skipped.push(skip(err.to_string()));
            continue;
        }
        let y: Vec<f64> = local.iter().map(|&k| y_fit[k]).collect();
        if cond.baseline == Baseline::BandMean {
            units.push(UnitFit {
                band,
                n_train: y.len(),
                selected: Vec::new(),
                predictor: Predictor::Mean(mean(&y)),
            });
            continue;
        }
        let rows: Vec<usize> = local.iter().map(|&k| train[k]).collect();
        let x = design.rows(ds, &rows);
        let et = EtRegressorConfig {
            rng_seed: cell_seed(cfg.et.rng_seed, seed, scope, &cond.key, band_label(band)),
            ..cfg.et
        };
        match fit_band(&x, &y, &design.columns, band, cfg.top_k_features, &et) {
            Ok(model) => units.push(UnitFit {
                band,
                n_train: y.len(),
                selected: model.selected.iter().map(|f| f.column.clone()).collect(),
                predictor: Predictor::Forest(model),
            }),
            Err(e) => skipped.push(skip(e.to_string())),
        }
    }
    FoldFit {
        seed,
        scope: scope.to_string(),
        routing: cond.routing,
        q90: quantile(&y_true, 0.90),
        q10: quantile(&y_true, 0.10),
        units,
        skipped,
    }
}

/// One fold plan per seed, stratified on the true targets.
pub fn fold_plans(y: &[f64], seeds: &[u64], n_folds: usize) -> Result<Vec<FoldPlan>> {
    seeds.iter().map(|&s| make_folds(y, n_folds, s)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutcome {
    pub seed: u64,
    /// Out-of-fold prediction per row; `None` when the row's cell was skipped.
    pub oof: Vec<Option<f64>>,
    pub fold_of: Vec<usize>,
    pub bright: Vec<bool>,
    pub dark: Vec<bool>,
    /// Metrics over rows with a prediction; `None` if they are degenerate.
    pub metrics: Option<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub condition: AblationCondition,
    pub n_features: usize,
    pub seeds: Vec<SeedOutcome>,
    /// Fits in (seed, fold) order.
    pub fits: Vec<FoldFit>,
}

impl CvResult {
    pub fn oof_count(&self) -> usize {
        self.seeds.iter().map(|s| s.oof.iter().flatten().count()).sum()
    }

    pub fn skipped(&self) -> Vec<&SkippedCell> {
        self.fits.iter().flat_map(|f| &f.skipped).collect()
    }

    pub fn summary(&self) -> Option<(MetricsReport, MetricsReport)> {
        let reports: Vec<MetricsReport> = self.seeds.iter().filter_map(|s| s.metrics.clone()).collect();
        MetricsReport::mean_sd(&reports)
    }
}

fn metrics_over(
    idx: &[usize],
    y: &[f64],
    pred: &[Option<f64>],
    bright: &[bool],
    dark: &[bool],
    ks: &[usize],
) -> Option<MetricsReport> {
    let rows: Vec<usize> = idx.iter().copied().filter(|&i| pred[i].is_some()).collect();
    let pick = |v: &dyn Fn(usize) -> f64| rows.iter().map(|&i| v(i)).collect::<Vec<f64>>();
    let yy = pick(&|i| y[i]);
    let yhat = pick(&|i| pred[i].expect("filtered"));
    let b: Vec<bool> = rows.iter().map(|&i| bright[i]).collect();
    let d: Vec<bool> = rows.iter().map(|&i| dark[i]).collect();
    MetricsReport::compute(&yy, &yhat, &b, &d, ks).ok()
}

type CellPredictions = (FoldFit, Vec<(usize, Option<f64>)>);

/// Pool out-of-fold predictions over every fold of every plan. `ds` must hold only
/// band-assigned rows; rows are labelled bright / dark with their own fold's thresholds.
pub fn run_random_cv(ds: &Dataset, cond: &AblationCondition, plans: &[FoldPlan], cfg: &RunConfig) -> Result<CvResult> {
    let design = cond.design(ds)?;
    let cells: Vec<(usize, usize)> = plans
        .iter()
        .enumerate()
        .flat_map(|(p, plan)| (0..plan.n_folds).map(move |f| (p, f)))
        .collect();
    let fits: Vec<CellPredictions> = cells
        .par_iter()
        .map(|&(p, fold)| {
            let plan = &plans[p];
            let fit = fit_partition(ds, &design, cond, &plan.train_rows(fold), plan.seed, &format!("cv/{fold}"), cfg);
            let preds = plan
                .test_rows(fold)
                .into_iter()
                .map(|i| (i, fit.predict(&design.row(ds, i), ds.band(i))))
                .collect();
            (fit, preds)
        })
        .collect();

    let n = ds.len();
    let mut seeds = Vec::new();
    for (p, plan) in plans.iter().enumerate() {
        let mut oof = vec![None; n];
        let mut bright = vec![false; n];
        let mut dark = vec![false; n];
        for ((fit, preds), _) in fits.iter().zip(&cells).filter(|(_, c)| c.0 == p) {
            for &(i, yhat) in preds {
                oof[i] = yhat;
                bright[i] = ds.qy[i] >= fit.q90;
                dark[i] = ds.qy[i] <= fit.q10;
            }
        }
        let all: Vec<usize> = (0..n).collect();
        let metrics = metrics_over(&all, &ds.qy, &oof, &bright, &dark, &cfg.screening_k);
        seeds.push(SeedOutcome {
            seed: plan.seed,
            oof,
            fold_of: plan.fold_of.clone(),
            bright,
            dark,
            metrics,
        });
    }
    Ok(CvResult {
        condition: cond.clone(),
        n_features: design.columns.len(),
        seeds,
        fits: fits.into_iter().map(|(f, _)| f).collect(),
    })
}

/// How often each column appears among a band model's first `top` selected features,
/// across all fits. Sorted by band, then descending count, then column name.
pub fn feature_recurrence(fits: &[FoldFit], top: usize) -> Vec<RecurrenceRow> {
    let mut counts: BTreeMap<(&'static str, String), usize> = BTreeMap::new();
    for fit in fits {
        for unit in &fit.units {
            for col in unit.selected.iter().take(top) {
                *counts.entry((band_label(unit.band), col.clone())).or_default() += 1;
            }
        }
    }
    let mut rows: Vec<RecurrenceRow> = counts
        .into_iter()
        .map(|((band, column), count)| RecurrenceRow {
            band: band.to_string(),
            column,
            count,
        })
        .collect();
    rows.sort_by(|a, b| a.band.cmp(&b.band).then(b.count.cmp(&a.count)).then(a.column.cmp(&b.column)));
    rows
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurrenceRow {
    pub band: String,
    pub column: String,
    pub count: usize,
}

pub const SCOPE_ALL: &str = "all";

#[derive(Debug, Clone, PartialEq)]
pub struct HomologySeed {
    pub seed: u64,
    pub fit: FoldFit,
    /// Prediction per test row index of the dataset.
    pub predictions: BTreeMap<usize, Option<f64>>,
    /// Keyed by bucket label or [`SCOPE_ALL`]; empty or degenerate scopes are absent.
    pub metrics: BTreeMap<String, MetricsReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomologyResult {
    pub condition: AblationCondition,
    pub seeds: Vec<HomologySeed>,
}

/// Fit once per seed on the fixed training set and score the test set per bucket, with
/// bright / dark thresholds from the training targets.
pub fn run_homology_eval(ds: &Dataset, split: &SplitPlan, cond: &AblationCondition, cfg: &RunConfig) -> Result<HomologyResult> {
    let index: BTreeMap<&str, usize> = ds.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let lookup = |ids: &[String]| -> Result<Vec<usize>> {
        ids.iter()
            .map(|id| index.get(id.as_str()).copied().ok_or_else(|| Error::Metadata(format!("split id `{id}` not in dataset"))))
            .collect()
    };
    let train = lookup(&split.train_ids)?;
    let test = lookup(&split.test_ids)?;
    if train.len() < MIN_BAND_ROWS {
        return Err(Error::TooFewSamples {
            needed: MIN_BAND_ROWS,
            got: train.len(),
        });
    }
    let design = cond.design(ds)?;
    let seeds = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let fit = fit_partition(ds, &design, cond, &train, seed, "homology", cfg);
            let mut pred = vec![None; ds.len()];
            let mut bright = vec![false; ds.len()];
            let mut dark = vec![false; ds.len()];
            for &i in &test {
                pred[i] = fit.predict(&design.row(ds, i), ds.band(i));
                bright[i] = ds.qy[i] >= fit.q90;
                dark[i] = ds.qy[i] <= fit.q10;
            }
            let mut metrics = BTreeMap::new();
            let mut scopes: Vec<(String, Vec<usize>)> = Bucket::ALL
                .into_iter()
                .map(|b| {
                    let rows = test.iter().copied().filter(|&i| split.bucket[&ds.ids[i]] == b).collect();
                    (b.label().to_string(), rows)
                })
                .collect();
            scopes.push((SCOPE_ALL.to_string(), test.clone()));
            for (label, rows) in scopes {
                if let Some(m) = metrics_over(&rows, &ds.qy, &pred, &bright, &dark, &cfg.screening_k) {
                    metrics.insert(label, m);
                }
            }
            HomologySeed {
                seed,
                predictions: test.iter().map(|&i| (i, pred[i])).collect(),
                fit,
                metrics,
            }
        })
        .collect();
    Ok(HomologyResult {
        condition: cond.clone(),
        seeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_seeds_differ_by_coordinate() {
        let a = cell_seed(0, 1, "cv/0", "full", "Red");
        assert_eq!(a, cell_seed(0, 1, "cv/0", "full", "Red"));
        assert_ne!(a, cell_seed(0, 2, "cv/0", "full", "Red"));
        assert_ne!(a, cell_seed(0, 1, "cv/1", "full", "Red"));
        assert_ne!(a, cell_seed(0, 1, "cv/0", "global", "Red"));
        assert_ne!(a, cell_seed(0, 1, "cv/0", "full", "FarRed"));
    }
}
