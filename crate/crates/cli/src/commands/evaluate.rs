use std::fmt::Write as _;
use std::path::Path;

use cromech_core::evaluate::{
    cv_report_rows, feature_recurrence, fold_plans, homology_report_rows, homology_split, run_homology_eval,
    run_random_cv, v54_stress, write_recurrence, write_report, write_stress, Bucket, CvResult, ReportRow,
};
use cromech_core::model::{ModelFile, ModelSet};
use cromech_core::{AblationCondition, Dataset, RunConfig, SplitPlan};

use super::split::read_split;
use crate::error::{io, CliError, Result};
use crate::output::{self, fmt_opt, FeatureTable, METRICS_CSV, RECURRENCE_CSV, SUMMARY_TXT};
use crate::sidecar::RunSidecar;
use crate::{AblateArgs, EvalHomologyArgs, EvalRandomArgs, Outcome, StressArgs};

pub const OOF_CSV: &str = "oof.csv";
pub const SKIPPED_CELLS_CSV: &str = "skipped.csv";
pub const PREDICTIONS_CSV: &str = "predictions.csv";
pub const ABLATION_CSV: &str = "ablation.csv";
pub const STRESS_CSV: &str = "stress.csv";
pub const STRESS_CELLS_CSV: &str = "stress_cells.csv";
pub const RECURRENCE_TOP: usize = 10;

struct Prepared {
    cfg: RunConfig,
    table: FeatureTable,
    ds: Dataset,
}

fn prepare(common: &crate::CommonArgs, features: &Path) -> Result<Prepared> {
    let cfg = common.resolve()?;
    output::ensure_dir(&common.out)?;
    let table = FeatureTable::load(features)?;
    let ds = table.modelled();
    Ok(Prepared { cfg, table, ds })
}

fn sidecar(command: &str, p: &Prepared) -> Result<RunSidecar> {
    RunSidecar::new(command, &p.cfg, &p.table.meta.seed_table_hash).input("features", &p.table.csv)
}

fn write_metrics(rows: &[ReportRow], ks: &[usize], path: &Path) -> Result<()> {
    write_report(rows, ks, output::create(path)?)?;
    Ok(())
}

fn write_oof(ds: &Dataset, res: &CvResult, path: &Path) -> Result<()> {
    let mut w = output::csv_writer(path)?;
    w.write_record(["condition", "seed", "id", "band", "fold", "qy", "prediction", "bright", "dark"])?;
    for s in &res.seeds {
        for i in 0..ds.len() {
            w.write_record([
                res.condition.key.clone(),
                s.seed.to_string(),
                ds.ids[i].clone(),
                ds.band(i).name().to_string(),
                s.fold_of[i].to_string(),
                ds.qy[i].to_string(),
                fmt_opt(s.oof[i]),
                s.bright[i].to_string(),
                s.dark[i].to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| io(path, e))
}

fn write_skipped_cells(results: &[&CvResult], path: &Path) -> Result<()> {
    let mut w = output::csv_writer(path)?;
    w.write_record(["condition", "seed", "scope", "band", "reason"])?;
    for res in results {
        for c in res.skipped() {
            w.write_record([&res.condition.key, &c.seed.to_string(), &c.scope, &c.band, &c.reason])?;
        }
    }
    w.flush().map_err(|e| io(path, e))
}

fn summary_line(out: &mut String, res: &CvResult) {
    match res.summary() {
        Some((mean, sd)) => {
            let _ = writeln!(
                out,
                "{:<18} features {:>3}  R {:.3} +/- {:.3}  MAE {:.3}  C {:.3}",
                res.condition.key, res.n_features, mean.pearson_r, sd.pearson_r, mean.mae, mean.compression
            );
        }
        None => {
            let _ = writeln!(out, "{:<18} features {:>3}  no defined metrics", res.condition.key, res.n_features);
        }
    }
}

fn expected_oof(ds: &Dataset, cfg: &RunConfig) -> usize {
    ds.len() * cfg.seeds.len()
}

pub fn eval_random(args: &EvalRandomArgs) -> Result<Outcome> {
    let p = prepare(&args.common, &args.features)?;
    let out = &args.common.out;
    let cond = AblationCondition::by_key(&args.condition)?;
    let plans = fold_plans(&p.ds.qy, &p.cfg.seeds, p.cfg.folds)?;
    let res = run_random_cv(&p.ds, &cond, &plans, &p.cfg)?;

    write_metrics(&cv_report_rows(&res), &p.cfg.screening_k, &out.join(METRICS_CSV))?;
    write_oof(&p.ds, &res, &out.join(OOF_CSV))?;
    write_recurrence(&feature_recurrence(&res.fits, RECURRENCE_TOP), output::create(&out.join(RECURRENCE_CSV))?)?;
    write_skipped_cells(&[&res], &out.join(SKIPPED_CELLS_CSV))?;
    sidecar("eval-random", &p)?.option("condition", &cond.key).write(out)?;

    let mut s = String::new();
    let _ = writeln!(s, "random cross-validation: {} seeds x {} folds", p.cfg.seeds.len(), p.cfg.folds);
    let _ = writeln!(s, "band-assigned proteins: {}", p.ds.len());
    summary_line(&mut s, &res);
    let _ = writeln!(s, "out-of-fold predictions: {} of {}", res.oof_count(), expected_oof(&p.ds, &p.cfg));
    let _ = writeln!(s, "skipped cells: {}", res.skipped().len());
    output::write_text(&out.join(SUMMARY_TXT), &s)?;
    Ok(Outcome::from_skips(expected_oof(&p.ds, &p.cfg) - res.oof_count()))
}

/// Keep only split ids present in the feature table; returns the number dropped.
fn restrict_split(plan: &SplitPlan, ds: &Dataset) -> (SplitPlan, usize) {
    let present: std::collections::BTreeSet<&str> = ds.ids.iter().map(String::as_str).collect();
    let keep = |ids: &[String]| -> Vec<String> { ids.iter().filter(|id| present.contains(id.as_str())).cloned().collect() };
    let mut out = plan.clone();
    out.train_ids = keep(&plan.train_ids);
    out.test_ids = keep(&plan.test_ids);
    out.max_similarity.retain(|id, _| present.contains(id.as_str()));
    out.bucket.retain(|id, _| present.contains(id.as_str()));
    let dropped = plan.train_ids.len() + plan.test_ids.len() - out.train_ids.len() - out.test_ids.len();
    (out, dropped)
}

pub fn eval_homology(args: &EvalHomologyArgs) -> Result<Outcome> {
    let p = prepare(&args.common, &args.features)?;
    let out = &args.common.out;
    let cond = AblationCondition::by_key(&args.condition)?;
    let bucket = match &args.bucket {
        Some(b) => Some(Bucket::from_label(b).ok_or_else(|| CliError::Usage(format!("unknown bucket `{b}`")))?),
        None => None,
    };
    let (split, dropped) = match &args.split {
        Some(dir) => restrict_split(&read_split(dir)?, &p.ds),
        None => {
            let plan = homology_split(&p.ds.ids, &p.ds.sequences, p.cfg.jaccard_tau)?;
            super::split::write_split(&plan, &[], out)?;
            (plan, 0)
        }
    };
    let res = run_homology_eval(&p.ds, &split, &cond, &p.cfg)?;

    let rows: Vec<ReportRow> = homology_report_rows(&res)
        .into_iter()
        .filter(|r| bucket.is_none_or(|b| r.scope == b.label()))
        .collect();
    write_metrics(&rows, &p.cfg.screening_k, &out.join(METRICS_CSV))?;

    let path = out.join(PREDICTIONS_CSV);
    let mut w = output::csv_writer(&path)?;
    w.write_record(["condition", "seed", "id", "band", "bucket", "max_jaccard", "qy", "prediction"])?;
    for s in &res.seeds {
        for (&i, yhat) in &s.predictions {
            let id = &p.ds.ids[i];
            let b = split.bucket[id];
            if bucket.is_some_and(|want| want != b) {
                continue;
            }
            w.write_record([
                cond.key.clone(),
                s.seed.to_string(),
                id.clone(),
                p.ds.band(i).name().to_string(),
                b.label().to_string(),
                split.max_similarity[id].to_string(),
                p.ds.qy[i].to_string(),
                fmt_opt(*yhat),
            ])?;
        }
    }
    w.flush().map_err(|e| io(&path, e))?;

    let models_dir = out.join("models");
    output::ensure_dir(&models_dir)?;
    let mut saved = 0;
    for s in &res.seeds {
        let models: Vec<_> = s
            .fit
            .units
            .iter()
            .filter_map(|u| match &u.predictor {
                cromech_core::evaluate::cv::Predictor::Forest(m) => Some(m.clone()),
                cromech_core::evaluate::cv::Predictor::Mean(_) => None,
            })
            .collect();
        if models.is_empty() {
            continue;
        }
        let set = ModelSet {
            routing: s.fit.routing,
            models,
        };
        ModelFile::new(set, p.cfg.et, p.cfg.top_k_features).save(models_dir.join(format!("model_seed{}.json", s.seed)))?;
        saved += 1;
    }

    let mut sc = sidecar("eval-homology", &p)?.option("condition", &cond.key);
    if let Some(dir) = &args.split {
        sc = sc.input("split", &dir.join(output::SPLIT_JSON))?;
    }
    if let Some(b) = bucket {
        sc = sc.option("bucket", b.label());
    }
    sc.write(out)?;

    let skipped_cells: usize = res.seeds.iter().map(|s| s.fit.skipped.len()).sum();
    let mut s = String::new();
    let _ = writeln!(s, "homology-controlled evaluation, condition {}", cond.key);
    let _ = write!(s, "{}", super::split::split_summary(&split, 0));
    let _ = writeln!(s, "split ids missing from the feature table: {dropped}");
    for r in rows.iter().filter(|r| r.seed == "mean") {
        let sd = rows.iter().find(|x| x.seed == "sd" && x.scope == r.scope);
        let _ = writeln!(
            s,
            "  {:<6} n {:>4}  R {:.3} +/- {:.3}  MAE {:.3}",
            r.scope,
            r.metrics.n,
            r.metrics.pearson_r,
            sd.map_or(f64::NAN, |x| x.metrics.pearson_r),
            r.metrics.mae
        );
    }
    let _ = writeln!(s, "model files: {saved}");
    let _ = writeln!(s, "skipped cells: {skipped_cells}");
    output::write_text(&out.join(SUMMARY_TXT), &s)?;
    Ok(Outcome::from_skips(dropped + skipped_cells))
}

pub fn ablate(args: &AblateArgs) -> Result<Outcome> {
    let p = prepare(&args.common, &args.features)?;
    let out = &args.common.out;
    let conditions = if args.condition.is_empty() {
        AblationCondition::all()
    } else {
        args.condition.iter().map(|k| AblationCondition::by_key(k)).collect::<Result<_, _>>()?
    };
    let plans = fold_plans(&p.ds.qy, &p.cfg.seeds, p.cfg.folds)?;
    let mut results = Vec::new();
    for cond in &conditions {
        log::info!("ablation condition {}", cond.key);
        results.push(run_random_cv(&p.ds, cond, &plans, &p.cfg)?);
    }

    let path = out.join(ABLATION_CSV);
    let mut w = output::csv_writer(&path)?;
    w.write_record(["key", "name", "n_features", "R_mean", "R_sd", "MAE_mean", "C_mean", "oof_predictions", "skipped_cells"])?;
    for res in &results {
        let summary = res.summary();
        let pick = |f: fn(&cromech_core::MetricsReport) -> f64, sd: bool| {
            fmt_opt(summary.as_ref().map(|(m, s)| if sd { f(s) } else { f(m) }))
        };
        w.write_record([
            res.condition.key.clone(),
            res.condition.name.clone(),
            res.n_features.to_string(),
            pick(|m| m.pearson_r, false),
            pick(|m| m.pearson_r, true),
            pick(|m| m.mae, false),
            pick(|m| m.compression, false),
            res.oof_count().to_string(),
            res.skipped().len().to_string(),
        ])?;
    }
    w.flush().map_err(|e| io(&path, e))?;

    let rows: Vec<ReportRow> = results.iter().flat_map(cv_report_rows).collect();
    write_metrics(&rows, &p.cfg.screening_k, &out.join(METRICS_CSV))?;
    if let Some(full) = results.iter().find(|r| r.condition.key == "full") {
        write_recurrence(&feature_recurrence(&full.fits, RECURRENCE_TOP), output::create(&out.join(RECURRENCE_CSV))?)?;
    }
    let refs: Vec<&CvResult> = results.iter().collect();
    write_skipped_cells(&refs, &out.join(SKIPPED_CELLS_CSV))?;
    let keys: Vec<&str> = conditions.iter().map(|c| c.key.as_str()).collect();
    sidecar("ablate", &p)?.option("conditions", keys.join(",")).write(out)?;

    let mut s = String::new();
    let _ = writeln!(s, "ablation: {} conditions, {} seeds x {} folds, n = {}", conditions.len(), p.cfg.seeds.len(), p.cfg.folds, p.ds.len());
    for res in &results {
        summary_line(&mut s, res);
    }
    let missing: usize = results.iter().map(|r| expected_oof(&p.ds, &p.cfg) - r.oof_count()).sum();
    let _ = writeln!(s, "missing out-of-fold predictions: {missing}");
    output::write_text(&out.join(SUMMARY_TXT), &s)?;
    Ok(Outcome::from_skips(missing))
}

pub fn stress(args: &StressArgs) -> Result<Outcome> {
    let p = prepare(&args.common, &args.features)?;
    let out = &args.common.out;
    let plans = fold_plans(&p.ds.qy, &p.cfg.seeds, p.cfg.folds)?;
    let res = v54_stress(&p.ds, &plans, &p.cfg)?;

    write_stress(&res.rows, output::create(&out.join(STRESS_CSV))?)?;
    let path = out.join(STRESS_CELLS_CSV);
    let mut w = output::csv_writer(&path)?;
    w.write_record(["perturbation", "condition", "seed", "n", "R", "MAE", "C"])?;
    for c in &res.cells {
        w.write_record([
            c.perturbation.clone(),
            c.condition.clone(),
            c.seed.to_string(),
            c.metrics.n.to_string(),
            c.metrics.pearson_r.to_string(),
            c.metrics.mae.to_string(),
            c.metrics.compression.to_string(),
        ])?;
    }
    w.flush().map_err(|e| io(&path, e))?;
    sidecar("stress", &p)?.write(out)?;

    let mut s = String::new();
    let _ = writeln!(s, "clamp stress test, n = {}, {} seeds", p.ds.len(), p.cfg.seeds.len());
    let _ = writeln!(s, "{:<32} {:>8} {:>8} {:>8} {:>8}  95% CI", "perturbation", "R_enr", "R_full", "R_v54", "buffer");
    for r in &res.rows {
        let _ = writeln!(
            s,
            "{:<32} {:>8.3} {:>8.3} {:>8.3} {:>8}  [{}, {}]",
            r.label,
            r.r_enrichment,
            r.r_full,
            r.r_v54,
            r.buffer_r.map_or("-".into(), |b| format!("{b:.3}")),
            r.ci_low.map_or("-".into(), |b| format!("{b:.3}")),
            r.ci_high.map_or("-".into(), |b| format!("{b:.3}")),
        );
    }
    output::write_text(&out.join(SUMMARY_TXT), &s)?;
    Ok(Outcome::Success)
}
