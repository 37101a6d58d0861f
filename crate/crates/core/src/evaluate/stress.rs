//! Clamp-descriptor stress test: corrupt held-out enrichment features and compare how
//! much enrichment-only, full and clamp-only models degrade.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ablation::AblationCondition;
use super::cv::{cell_seed, fit_partition, FoldFit};
use super::folds::FoldPlan;
use super::metrics::MetricsReport;
use crate::config::RunConfig;
use crate::dataset::Dataset;
use crate::error::Result;
use crate::signals::FeatureSchema;
use crate::stats::{mean, pearson, pop_sd, quantile};

pub const STRESS_CONDITIONS: [&str; 3] = ["enrichment_only", "full", "v54_only"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    Clean,
    Noise { sigma: f64 },
    Dropout { p: f64 },
    BadStructure { fraction: f64, sigma: f64 },
}

impl Perturbation {
    pub fn key(&self) -> String {
        match *self {
            Perturbation::Clean => "clean".into(),
            Perturbation::Noise { sigma } => format!("noise_{sigma:.2}"),
            Perturbation::Dropout { p } => format!("dropout_{p:.2}"),
            Perturbation::BadStructure { fraction, sigma } => format!("bad_structure_{fraction:.2}_{sigma:.2}"),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Perturbation::Clean => "Clean input".into(),
            Perturbation::Noise { sigma } => format!("Gaussian noise, sigma={sigma:.2}"),
            Perturbation::Dropout { p } => format!("Feature dropout, p={p:.2}"),
            Perturbation::BadStructure { fraction, .. } => {
                format!("Bad-structure subset, {:.0}%", fraction * 100.0)
            }
        }
    }

    /// Clean input followed by every configured corruption.
    pub fn schedule(cfg: &RunConfig) -> Vec<Perturbation> {
        let s = &cfg.stress;
        let mut out = vec![Perturbation::Clean];
        out.extend(s.noise_sigmas.iter().map(|&sigma| Perturbation::Noise { sigma }));
        out.extend(s.dropout_rates.iter().map(|&p| Perturbation::Dropout { p }));
        if s.bad_structure_fraction > 0.0 {
            out.push(Perturbation::BadStructure {
                fraction: s.bad_structure_fraction,
                sigma: s.bad_structure_sigma,
            });
        }
        out
    }
}

/// Column means and population standard deviations of the enrichment block over `rows`.
fn enrichment_stats(ds: &Dataset, rows: &[usize]) -> (Vec<f64>, Vec<f64>) {
    (0..FeatureSchema::N_ENRICHMENT)
        .map(|j| {
            let col: Vec<f64> = rows.iter().map(|&i| ds.x[i][j]).collect();
            (mean(&col), pop_sd(&col))
        })
        .unzip()
}

/// Corrupt the enrichment block of held-out candidate rows in place. Noise is added on
/// the training-standardised scale, `x + sigma * sd_train * z`; dropout replaces a value
/// by the training mean. Clamp columns are never touched.
pub fn perturb(rows: &mut [Vec<f64>], pert: Perturbation, train_mean: &[f64], train_sd: &[f64], rng: &mut ChaCha8Rng) {
    let noise = |row: &mut Vec<f64>, sigma: f64, rng: &mut ChaCha8Rng| {
        for j in 0..FeatureSchema::N_ENRICHMENT {
            let z: f64 = rng.sample(StandardNormal);
            row[j] += sigma * train_sd[j] * z;
        }
    };
    match pert {
        Perturbation::Clean => {}
        Perturbation::Noise { sigma } => rows.iter_mut().for_each(|r| noise(r, sigma, rng)),
        Perturbation::Dropout { p } => {
            for row in rows.iter_mut() {
                for j in 0..FeatureSchema::N_ENRICHMENT {
                    if rng.random::<f64>() < p {
                        row[j] = train_mean[j];
                    }
                }
            }
        }
        Perturbation::BadStructure { fraction, sigma } => {
            let k = (fraction * rows.len() as f64).round() as usize;
            let mut order: Vec<usize> = (0..rows.len()).collect();
            order.shuffle(rng);
            for &i in order.iter().take(k) {
                noise(&mut rows[i], sigma, rng);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressCell {
    pub perturbation: String,
    pub condition: String,
    pub seed: u64,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressRow {
    pub perturbation: String,
    pub label: String,
    /// Seed-mean pooled OOF correlations.
    pub r_enrichment: f64,
    pub r_full: f64,
    pub r_v54: f64,
    /// Enrichment-only degradation minus full-model degradation; absent for clean input.
    pub buffer_r: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressResult {
    pub rows: Vec<StressRow>,
    pub cells: Vec<StressCell>,
}

impl StressResult {
    pub fn cell(&self, perturbation: &str, condition: &str, seed: u64) -> Option<&StressCell> {
        self.cells
            .iter()
            .find(|c| c.perturbation == perturbation && c.condition == condition && c.seed == seed)
    }
}

/// Pooled OOF predictions, `[perturbation][condition][plan] -> per-row prediction`.
type Grid = Vec<Vec<Vec<Vec<Option<f64>>>>>;

/// Run the stress test over the given fold plans. Models are trained on clean folds with
/// the same cell seeds as [`super::cv::run_random_cv`], so clean rows reproduce the
/// random-CV metrics of each condition.
pub fn v54_stress(ds: &Dataset, plans: &[FoldPlan], cfg: &RunConfig) -> Result<StressResult> {
    let conditions: Vec<AblationCondition> = STRESS_CONDITIONS
        .iter()
        .map(|k| AblationCondition::by_key(k))
        .collect::<Result<_>>()?;
    let designs = conditions.iter().map(|c| c.design(ds)).collect::<Result<Vec<_>>>()?;
    let schedule = Perturbation::schedule(cfg);
    let n = ds.len();

    let cells: Vec<(usize, usize)> = plans
        .iter()
        .enumerate()
        .flat_map(|(p, plan)| (0..plan.n_folds).map(move |f| (p, f)))
        .collect();
    type CellOut = (usize, f64, f64, Vec<usize>, Vec<Vec<Vec<Option<f64>>>>);
    let outputs: Vec<CellOut> = cells
        .par_iter()
        .map(|&(p, fold)| {
            let plan = &plans[p];
            let scope = format!("cv/{fold}");
            let train = plan.train_rows(fold);
            let test = plan.test_rows(fold);
            let fits: Vec<FoldFit> = conditions
                .iter()
                .zip(&designs)
                .map(|(c, d)| fit_partition(ds, d, c, &train, plan.seed, &scope, cfg))
                .collect();
            let (mu, sd) = enrichment_stats(ds, &train);
            let preds = schedule
                .iter()
                .map(|pert| {
                    let mut rows: Vec<Vec<f64>> = test.iter().map(|&i| ds.x[i].clone()).collect();
                    let s = cell_seed(cfg.et.rng_seed, plan.seed, &scope, "stress", &pert.key());
                    perturb(&mut rows, *pert, &mu, &sd, &mut ChaCha8Rng::seed_from_u64(s));
                    fits.iter()
                        .zip(&designs)
                        .map(|(fit, d)| {
                            test.iter()
                                .zip(&rows)
                                .map(|(&i, row)| fit.predict(&d.row_from(row, ds.emission_nm[i]), ds.band(i)))
                                .collect()
                        })
                        .collect()
                })
                .collect();
            (p, fits[0].q90, fits[0].q10, test, preds)
        })
        .collect();

    let mut grid: Grid = vec![vec![vec![vec![None; n]; plans.len()]; conditions.len()]; schedule.len()];
    let mut bright = vec![vec![false; n]; plans.len()];
    let mut dark = vec![vec![false; n]; plans.len()];
    for (p, q90, q10, test, preds) in &outputs {
        for &i in test {
            bright[*p][i] = ds.qy[i] >= *q90;
            dark[*p][i] = ds.qy[i] <= *q10;
        }
        for (s, per_cond) in preds.iter().enumerate() {
            for (c, values) in per_cond.iter().enumerate() {
                for (&i, v) in test.iter().zip(values) {
                    grid[s][c][*p][i] = *v;
                }
            }
        }
    }

    let mut result = StressResult {
        rows: Vec::new(),
        cells: Vec::new(),
    };
    // Seed-mean R per perturbation and condition.
    let mut mean_r = vec![vec![0.0; conditions.len()]; schedule.len()];
    for (s, pert) in schedule.iter().enumerate() {
        for (c, cond) in conditions.iter().enumerate() {
            let mut rs = Vec::new();
            for (p, plan) in plans.iter().enumerate() {
                let rows: Vec<usize> = (0..n).filter(|&i| grid[s][c][p][i].is_some()).collect();
                let y: Vec<f64> = rows.iter().map(|&i| ds.qy[i]).collect();
                let yhat: Vec<f64> = rows.iter().map(|&i| grid[s][c][p][i].expect("filtered")).collect();
                let b: Vec<bool> = rows.iter().map(|&i| bright[p][i]).collect();
                let d: Vec<bool> = rows.iter().map(|&i| dark[p][i]).collect();
                if let Ok(metrics) = MetricsReport::compute(&y, &yhat, &b, &d, &cfg.screening_k) {
                    rs.push(metrics.pearson_r);
                    result.cells.push(StressCell {
                        perturbation: pert.key(),
                        condition: cond.key.clone(),
                        seed: plan.seed,
                        metrics,
                    });
                }
            }
            mean_r[s][c] = if rs.is_empty() { f64::NAN } else { mean(&rs) };
        }
    }

    let (enr, full, v54) = (0, 1, 2);
    for (s, pert) in schedule.iter().enumerate() {
        let mut row = StressRow {
            perturbation: pert.key(),
            label: pert.label(),
            r_enrichment: mean_r[s][enr],
            r_full: mean_r[s][full],
            r_v54: mean_r[s][v54],
            buffer_r: None,
            ci_low: None,
            ci_high: None,
        };
        if *pert != Perturbation::Clean {
            row.buffer_r = Some((mean_r[0][enr] - mean_r[s][enr]) - (mean_r[0][full] - mean_r[s][full]));
            let boot_seed = cell_seed(cfg.et.rng_seed, 0, "bootstrap", "stress", &pert.key());
            let reps = bootstrap_buffer(ds, &grid, s, plans.len(), cfg.stress.bootstrap_resamples, boot_seed);
            if !reps.is_empty() {
                row.ci_low = Some(quantile(&reps, 0.025));
                row.ci_high = Some(quantile(&reps, 0.975));
            }
        }
        result.rows.push(row);
    }
    Ok(result)
}

/// Paired bootstrap of Buffer_R: proteins are resampled with replacement and the same
/// draw is applied to all four prediction vectors of every seed.
fn bootstrap_buffer(ds: &Dataset, grid: &Grid, s: usize, n_plans: usize, resamples: usize, seed: u64) -> Vec<f64> {
    let n = ds.len();
    let (enr, full) = (0, 1);
    let complete: Vec<Vec<usize>> = (0..n_plans)
        .map(|p| {
            (0..n)
                .filter(|&i| [enr, full].iter().all(|&c| grid[0][c][p][i].is_some() && grid[s][c][p][i].is_some()))
                .collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let draws: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut per_plan = Vec::with_capacity(n_plans);
        for (p, ok) in complete.iter().enumerate() {
            let rows: Vec<usize> = draws.iter().copied().filter(|i| ok.binary_search(i).is_ok()).collect();
            if rows.len() < 2 {
                continue;
            }
            let y: Vec<f64> = rows.iter().map(|&i| ds.qy[i]).collect();
            let r = |sched: usize, c: usize| {
                let yhat: Vec<f64> = rows.iter().map(|&i| grid[sched][c][p][i].expect("complete")).collect();
                pearson(&yhat, &y).unwrap_or(0.0)
            };
            per_plan.push((r(0, enr) - r(s, enr)) - (r(0, full) - r(s, full)));
        }
        if !per_plan.is_empty() {
            out.push(mean(&per_plan));
        }
    }
    out
}
