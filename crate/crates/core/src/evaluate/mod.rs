//! Evaluation harness: random CV, homology-controlled split, ablations, stress test and
//! report tables.

pub mod ablation;
pub mod cv;
pub mod folds;
pub mod kmer;
pub mod metrics;
pub mod stress;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use ablation::{AblationCondition, Baseline, Design, FeatureSubset, Target};
pub use cv::{
    feature_recurrence, fit_partition, fold_plans, run_homology_eval, run_random_cv, CvResult, FoldFit,
    HomologyResult, RecurrenceRow, SkippedCell, SCOPE_ALL,
};
pub use folds::{make_folds, quantile_bins, FoldPlan};
pub use kmer::{homology_split, kmer_jaccard, Bucket, SplitPlan};
pub use metrics::{pearson_mae_compression, topk_from_labels, topk_metrics, MetricsReport, Regression};
pub use stress::{v54_stress, Perturbation, StressResult, StressRow};

use crate::error::{Error, Result};

pub const SCOPE_OOF: &str = "oof";

/// One line of a metrics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub condition: String,
    /// A seed number, or `mean` / `sd` for aggregates.
    pub seed: String,
    pub scope: String,
    pub metrics: MetricsReport,
}

impl ReportRow {
    pub fn new(condition: &str, seed: impl ToString, scope: &str, metrics: MetricsReport) -> Self {
        Self {
            condition: condition.to_string(),
            seed: seed.to_string(),
            scope: scope.to_string(),
            metrics,
        }
    }
}

/// Per-seed rows followed by mean and sd rows for a random-CV result.
pub fn cv_report_rows(res: &CvResult) -> Vec<ReportRow> {
    let key = &res.condition.key;
    let mut rows: Vec<ReportRow> = res
        .seeds
        .iter()
        .filter_map(|s| s.metrics.clone().map(|m| ReportRow::new(key, s.seed, SCOPE_OOF, m)))
        .collect();
    if let Some((mean, sd)) = res.summary() {
        rows.push(ReportRow::new(key, "mean", SCOPE_OOF, mean));
        rows.push(ReportRow::new(key, "sd", SCOPE_OOF, sd));
    }
    rows
}

/// Per-seed, per-scope rows plus mean and sd across seeds for each scope.
pub fn homology_report_rows(res: &HomologyResult) -> Vec<ReportRow> {
    let key = &res.condition.key;
    let mut rows = Vec::new();
    let scopes: Vec<String> = Bucket::ALL
        .iter()
        .map(|b| b.label().to_string())
        .chain([SCOPE_ALL.to_string()])
        .collect();
    for scope in &scopes {
        let reports: Vec<MetricsReport> = res.seeds.iter().filter_map(|s| s.metrics.get(scope).cloned()).collect();
        for s in &res.seeds {
            if let Some(m) = s.metrics.get(scope) {
                rows.push(ReportRow::new(key, s.seed, scope, m.clone()));
            }
        }
        if let Some((mean, sd)) = MetricsReport::mean_sd(&reports) {
            rows.push(ReportRow::new(key, "mean", scope, mean));
            rows.push(ReportRow::new(key, "sd", scope, sd));
        }
    }
    rows
}

fn csv_err(e: csv::Error) -> Error {
    Error::Metadata(e.to_string())
}

fn opt(v: Option<&f64>) -> String {
    v.map(f64::to_string).unwrap_or_default()
}

/// Write metrics rows as CSV: `condition,seed,scope,n,R,MAE,C,bright_p@K...,dark_p@K...`.
/// Missing P@K values (K larger than the scope) are left empty.
pub fn write_report<W: Write>(rows: &[ReportRow], ks: &[usize], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["condition", "seed", "scope", "n", "R", "MAE", "C"].map(String::from).to_vec();
    header.extend(ks.iter().map(|k| format!("bright_p@{k}")));
    header.extend(ks.iter().map(|k| format!("dark_p@{k}")));
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        let m = &row.metrics;
        let mut rec = vec![
            row.condition.clone(),
            row.seed.clone(),
            row.scope.clone(),
            m.n.to_string(),
            m.pearson_r.to_string(),
            m.mae.to_string(),
            m.compression.to_string(),
        ];
        rec.extend(ks.iter().map(|k| opt(m.bright_p.get(k))));
        rec.extend(ks.iter().map(|k| opt(m.dark_p.get(k))));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Metadata(e.to_string()))
}

/// Read back a table written by [`write_report`].
pub fn read_report<R: std::io::Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let ks = |prefix: &str| -> Vec<(usize, usize)> {
        headers
            .iter()
            .enumerate()
            .filter_map(|(pos, h)| h.strip_prefix(prefix).and_then(|k| k.parse().ok()).map(|k| (pos, k)))
            .collect()
    };
    let (bright_cols, dark_cols) = (ks("bright_p@"), ks("dark_p@"));
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k).unwrap_or("").parse().map_err(|_| Error::MalformedRecord {
                line: line + 2,
                reason: format!("column {k} is not a number"),
            })
        };
        let pk = |cols: &[(usize, usize)]| {
            cols.iter()
                .filter_map(|&(pos, k)| rec.get(pos).and_then(|v| v.parse().ok()).map(|v| (k, v)))
                .collect()
        };
        rows.push(ReportRow {
            condition: rec[0].to_string(),
            seed: rec[1].to_string(),
            scope: rec[2].to_string(),
            metrics: MetricsReport {
                n: num(3)? as usize,
                pearson_r: num(4)?,
                r_defined: true,
                mae: num(5)?,
                compression: num(6)?,
                bright_p: pk(&bright_cols),
                dark_p: pk(&dark_cols),
            },
        });
    }
    Ok(rows)
}

pub fn write_recurrence<W: Write>(rows: &[RecurrenceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Metadata(e.to_string()))
}

pub fn read_recurrence<R: std::io::Read>(input: R) -> Result<Vec<RecurrenceRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err)
}

pub fn write_stress<W: Write>(rows: &[StressRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["perturbation", "label", "R_enrichment_only", "R_full", "R_v54_only", "buffer_R", "ci_low", "ci_high"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.perturbation.clone(),
            r.label.clone(),
            r.r_enrichment.to_string(),
            r.r_full.to_string(),
            r.r_v54.to_string(),
            opt(r.buffer_r.as_ref()),
            opt(r.ci_low.as_ref()),
            opt(r.ci_high.as_ref()),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Metadata(e.to_string()))
}
