//! Regression and screening metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{mean, pearson, pop_sd};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    /// Sample Pearson correlation; 0 when predictions are constant.
    pub r: f64,
    /// False when `r` was undefined and reported as 0.
    pub r_defined: bool,
    pub mae: f64,
    /// sd(prediction) / sd(target), population convention for both.
    pub compression: f64,
}

pub fn pearson_mae_compression(y: &[f64], yhat: &[f64]) -> Result<Regression> {
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch(format!("{} targets vs {} predictions", y.len(), yhat.len())));
    }
    if y.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: y.len() });
    }
    let sd_y = pop_sd(y);
    if sd_y == 0.0 {
        return Err(Error::DegenerateTarget);
    }
    let r = pearson(yhat, y);
    let mae = y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64;
    Ok(Regression {
        r: r.unwrap_or(0.0),
        r_defined: r.is_some(),
        mae,
        compression: pop_sd(yhat) / sd_y,
    })
}

/// Row order of `yhat` from largest to smallest, equal predictions in index order.
fn descending(yhat: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..yhat.len()).collect();
    idx.sort_by(|&a, &b| yhat[b].total_cmp(&yhat[a]).then(a.cmp(&b)));
    idx
}

fn ascending(yhat: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..yhat.len()).collect();
    idx.sort_by(|&a, &b| yhat[a].total_cmp(&yhat[b]).then(a.cmp(&b)));
    idx
}

/// Bright and dark precision at `k` given per-row labels. `None` when `k` is 0 or exceeds
/// the number of rows.
pub fn topk_from_labels(yhat: &[f64], bright: &[bool], dark: &[bool], k: usize) -> Option<(f64, f64)> {
    if k == 0 || k > yhat.len() {
        return None;
    }
    let hits = |order: Vec<usize>, labels: &[bool]| {
        order.into_iter().take(k).filter(|&i| labels[i]).count() as f64 / k as f64
    };
    Some((hits(descending(yhat), bright), hits(ascending(yhat), dark)))
}

/// Bright P@K (`y ≥ q90` among the K highest predictions) and Dark P@K (`y ≤ q10` among
/// the K lowest).
pub fn topk_metrics(y: &[f64], yhat: &[f64], q90: f64, q10: f64, k: usize) -> Option<(f64, f64)> {
    let bright: Vec<bool> = y.iter().map(|v| *v >= q90).collect();
    let dark: Vec<bool> = y.iter().map(|v| *v <= q10).collect();
    topk_from_labels(yhat, &bright, &dark, k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    pub pearson_r: f64,
    pub r_defined: bool,
    pub mae: f64,
    pub compression: f64,
    pub bright_p: BTreeMap<usize, f64>,
    pub dark_p: BTreeMap<usize, f64>,
}

impl MetricsReport {
    pub fn compute(y: &[f64], yhat: &[f64], bright: &[bool], dark: &[bool], ks: &[usize]) -> Result<Self> {
        let reg = pearson_mae_compression(y, yhat)?;
        let mut report = Self {
            n: y.len(),
            pearson_r: reg.r,
            r_defined: reg.r_defined,
            mae: reg.mae,
            compression: reg.compression,
            bright_p: BTreeMap::new(),
            dark_p: BTreeMap::new(),
        };
        for &k in ks {
            if let Some((b, d)) = topk_from_labels(yhat, bright, dark, k) {
                report.bright_p.insert(k, b);
                report.dark_p.insert(k, d);
            }
        }
        Ok(report)
    }

    /// Column-wise mean and sample standard deviation over several reports (e.g. seeds).
    /// A P@K entry is aggregated only if every report has it.
    pub fn mean_sd(reports: &[MetricsReport]) -> Option<(MetricsReport, MetricsReport)> {
        let first = reports.first()?;
        let agg = |f: &dyn Fn(&MetricsReport) -> f64| {
            let xs: Vec<f64> = reports.iter().map(f).collect();
            (mean(&xs), crate::stats::sample_sd(&xs))
        };
        let (r_m, r_s) = agg(&|m| m.pearson_r);
        let (mae_m, mae_s) = agg(&|m| m.mae);
        let (c_m, c_s) = agg(&|m| m.compression);
        let (n_m, _) = agg(&|m| m.n as f64);
        let mut mean_rep = MetricsReport {
            n: n_m.round() as usize,
            pearson_r: r_m,
            r_defined: reports.iter().all(|m| m.r_defined),
            mae: mae_m,
            compression: c_m,
            bright_p: BTreeMap::new(),
            dark_p: BTreeMap::new(),
        };
        let mut sd_rep = MetricsReport {
            pearson_r: r_s,
            mae: mae_s,
            compression: c_s,
            ..mean_rep.clone()
        };
        for &k in first.bright_p.keys() {
            if reports.iter().all(|m| m.bright_p.contains_key(&k)) {
                let (bm, bs) = agg(&|m| m.bright_p[&k]);
                let (dm, ds) = agg(&|m| m.dark_p[&k]);
                mean_rep.bright_p.insert(k, bm);
                mean_rep.dark_p.insert(k, dm);
                sd_rep.bright_p.insert(k, bs);
                sd_rep.dark_p.insert(k, ds);
            }
        }
        Some((mean_rep, sd_rep))
    }
}
