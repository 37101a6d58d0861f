use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use cromech_core::evaluate::{read_recurrence, read_report, ReportRow};

use crate::error::{io, CliError, Result};
use crate::output::{self, METRICS_CSV, RECURRENCE_CSV, SUMMARY_TXT};
use crate::plot::{bubble_chart, line_chart, Bubble, Series};
use crate::sidecar::RunSidecar;
use crate::{Outcome, ReportArgs};

pub const FRONTIER_CSV: &str = "frontier.csv";
pub const FRONTIER_RANDOM_SVG: &str = "frontier_random.svg";
pub const FRONTIER_HOMOLOGY_SVG: &str = "frontier_homology.svg";
pub const RECURRENCE_SVG: &str = "recurrence.svg";

struct FrontierPoint {
    source: &'static str,
    condition: String,
    scope: String,
    screen: &'static str,
    k: usize,
    mean: f64,
    sd: Option<f64>,
}

fn frontier(source: &'static str, rows: &[ReportRow]) -> Vec<FrontierPoint> {
    let mut out = Vec::new();
    for r in rows.iter().filter(|r| r.seed == "mean") {
        let sd = rows
            .iter()
            .find(|x| x.seed == "sd" && x.condition == r.condition && x.scope == r.scope);
        for (screen, mean_map, sd_map) in [
            ("bright", &r.metrics.bright_p, sd.map(|s| &s.metrics.bright_p)),
            ("dark", &r.metrics.dark_p, sd.map(|s| &s.metrics.dark_p)),
        ] {
            for (&k, &mean) in mean_map {
                out.push(FrontierPoint {
                    source,
                    condition: r.condition.clone(),
                    scope: r.scope.clone(),
                    screen,
                    k,
                    mean,
                    sd: sd_map.and_then(|m| m.get(&k).copied()),
                });
            }
        }
    }
    out
}

fn series(points: &[FrontierPoint], label: impl Fn(&FrontierPoint) -> String) -> Vec<Series> {
    let mut grouped: BTreeMap<(String, &str), Vec<(f64, f64)>> = BTreeMap::new();
    let mut order: Vec<(String, &str)> = Vec::new();
    for p in points {
        let key = (label(p), p.screen);
        if !grouped.contains_key(&key) {
            order.push(key.clone());
        }
        grouped.entry(key).or_default().push((p.k as f64, p.mean));
    }
    order
        .into_iter()
        .map(|key| Series {
            name: format!("{} {}", key.0, key.1),
            dashed: key.1 == "dark",
            points: grouped.remove(&key).unwrap_or_default(),
        })
        .collect()
}

fn read_rows(dir: &Path) -> Result<Vec<ReportRow>> {
    Ok(read_report(output::open(&dir.join(METRICS_CSV))?)?)
}

pub fn run(args: &ReportArgs) -> Result<Outcome> {
    if args.random.is_none() && args.homology.is_none() {
        return Err(CliError::Usage("report needs --random and/or --homology".into()));
    }
    let cfg = args.common.resolve()?;
    let out = &args.common.out;
    output::ensure_dir(out)?;
    let seed_hash = super::seed_table(&cfg)?.hash().to_string();
    let mut sidecar = RunSidecar::new("report", &cfg, &seed_hash);
    let mut points = Vec::new();
    let mut summary = String::from("report\n");

    if let Some(dir) = &args.random {
        let rows = read_rows(dir)?;
        sidecar = sidecar.input("random_metrics", &dir.join(METRICS_CSV))?;
        let pts = frontier("random", &rows);
        let svg = line_chart(
            "Top-K screening precision, random CV",
            "K",
            "precision",
            &series(&pts, |p| p.condition.clone()),
        );
        output::write_text(&out.join(FRONTIER_RANDOM_SVG), &svg)?;
        let _ = writeln!(summary, "random frontier points: {}", pts.len());
        points.extend(pts);

        let rec_path = dir.join(RECURRENCE_CSV);
        if rec_path.is_file() {
            sidecar = sidecar.input("recurrence", &rec_path)?;
            let rec = read_recurrence(output::open(&rec_path)?)?;
            let mut bands: Vec<String> = Vec::new();
            for r in &rec {
                if !bands.contains(&r.band) {
                    bands.push(r.band.clone());
                }
            }
            let bubbles: Vec<Bubble> = rec
                .iter()
                .map(|r| Bubble {
                    column: bands.iter().position(|b| *b == r.band).expect("band collected"),
                    row_label: r.column.clone(),
                    value: r.count as f64,
                })
                .collect();
            let svg = bubble_chart("Selected-feature recurrence across folds and seeds", &bands, &bubbles);
            output::write_text(&out.join(RECURRENCE_SVG), &svg)?;
            let _ = writeln!(summary, "recurrence entries: {}", rec.len());
        }
    }

    if let Some(dir) = &args.homology {
        let rows = read_rows(dir)?;
        sidecar = sidecar.input("homology_metrics", &dir.join(METRICS_CSV))?;
        let pts = frontier("homology", &rows);
        let multi = rows.iter().any(|r| r.condition != rows[0].condition);
        let svg = line_chart(
            "Top-K screening precision by similarity bucket",
            "K",
            "precision",
            &series(&pts, |p| {
                if multi {
                    format!("{} {}", p.condition, p.scope)
                } else {
                    p.scope.clone()
                }
            }),
        );
        output::write_text(&out.join(FRONTIER_HOMOLOGY_SVG), &svg)?;
        let _ = writeln!(summary, "homology frontier points: {}", pts.len());
        points.extend(pts);
    }

    let path = out.join(FRONTIER_CSV);
    let mut w = output::csv_writer(&path)?;
    w.write_record(["source", "condition", "scope", "screen", "K", "precision_mean", "precision_sd"])?;
    for p in &points {
        w.write_record([
            p.source.to_string(),
            p.condition.clone(),
            p.scope.clone(),
            p.screen.to_string(),
            p.k.to_string(),
            p.mean.to_string(),
            output::fmt_opt(p.sd),
        ])?;
    }
    w.flush().map_err(|e| io(&path, e))?;
    sidecar.write(out)?;
    output::write_text(&out.join(SUMMARY_TXT), &summary)?;
    Ok(Outcome::Success)
}
