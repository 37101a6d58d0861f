use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cromech_core::dataset::{FeatureTableMeta, SkippedRow};
use cromech_core::{
    assign_band, family_mapping, featurize_structure, load_metadata, parse_structure, Dataset, FeatureVector,
    MaturationState, ProteinRecord,
};
use rayon::prelude::*;

use super::{reason_code, seed_table};
use crate::error::{CliError, Result};
use crate::output::{self, FEATURES_CSV, FEATURES_META, SUMMARY_TXT};
use crate::sidecar::RunSidecar;
use crate::{FeaturizeArgs, Outcome};

pub const SKIPPED_CSV: &str = "skipped.csv";

fn structure_path(rec: &ProteinRecord, base: &Path) -> PathBuf {
    let p = Path::new(&rec.structure_path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn flags(f: &FeatureVector, emission_nm: f64) -> Vec<String> {
    let mut out = vec![match f.maturation_state {
        MaturationState::NativeCro => "native_cro".to_string(),
        MaturationState::RegisteredTriad => "registered_triad".to_string(),
    }];
    if f.empty_neighbourhood {
        out.push("empty_neighbourhood".into());
    }
    out.extend(f.missing_regions.iter().map(|r| format!("missing_region:{}", r.name())));
    if !assign_band(emission_nm).is_modelled() {
        out.push("excluded_band".into());
    }
    out
}

pub fn run(args: &FeaturizeArgs) -> Result<Outcome> {
    let mut cfg = args.common.resolve()?;
    if let Some(m) = &args.metadata {
        cfg.paths.metadata = Some(m.clone());
    }
    if let Some(s) = &args.structures {
        cfg.paths.structures = Some(s.clone());
    }
    let metadata = cfg
        .paths
        .metadata
        .clone()
        .ok_or_else(|| CliError::Usage("--metadata is required".into()))?;
    let base = match &cfg.paths.structures {
        Some(dir) => dir.clone(),
        None => metadata.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let out = &args.common.out;
    output::ensure_dir(out)?;

    let records = load_metadata(&metadata)?;
    let seeds = seed_table(&cfg)?;
    let fcfg = cfg.feature_config();

    let results: Vec<std::result::Result<FeatureVector, SkippedRow>> = records
        .par_iter()
        .map(|rec| {
            let path = structure_path(rec, &base);
            parse_structure(&path)
                .and_then(|mut s| {
                    s.id = rec.id.clone();
                    featurize_structure(&s, &seeds, &fcfg)
                })
                .map_err(|e| {
                    log::warn!("{}: {e}", rec.id);
                    SkippedRow {
                        id: rec.id.clone(),
                        reason: format!("{}: {e}", reason_code(&e)),
                    }
                })
        })
        .collect();

    let mut features = Vec::new();
    let mut skipped = Vec::new();
    let mut flag_map = BTreeMap::new();
    for (rec, r) in records.iter().zip(results) {
        match r {
            Ok(f) => {
                flag_map.insert(rec.id.clone(), flags(&f, rec.emission_nm));
                features.push(f);
            }
            Err(s) => skipped.push(s),
        }
    }
    if features.is_empty() {
        return Err(CliError::AllRowsFailed(records.len()));
    }

    let ds = Dataset::from_features(&records, &features);
    ds.save(out.join(FEATURES_CSV))?;
    let meta = FeatureTableMeta {
        schema_hash: family_mapping().hash(),
        seed_table_hash: seeds.hash().to_string(),
        config_hash: cfg.hash(),
        config: cfg.clone(),
        n_rows: ds.len(),
        skipped: skipped.clone(),
        flags: flag_map.clone(),
    };
    meta.save(out.join(FEATURES_META))?;

    let mut w = output::csv_writer(&out.join(SKIPPED_CSV))?;
    w.write_record(["id", "reason"])?;
    for s in &skipped {
        w.write_record([&s.id, &s.reason])?;
    }
    w.flush().map_err(|e| crate::error::io(out.join(SKIPPED_CSV), e))?;

    let mut sidecar = RunSidecar::new("featurize", &cfg, seeds.hash()).input("metadata", &metadata)?;
    if let Some(p) = &cfg.paths.seed_table {
        sidecar = sidecar.input("seed_table", p)?;
    }
    for rec in &records {
        let p = structure_path(rec, &base);
        if p.is_file() {
            sidecar = sidecar.input(&format!("structure:{}", rec.id), &p)?;
        }
    }
    sidecar.write(out)?;

    let count = |flag: &str| flag_map.values().filter(|f| f.iter().any(|x| x == flag)).count();
    let mut summary = String::new();
    let _ = writeln!(summary, "featurize");
    let _ = writeln!(summary, "proteins in metadata: {}", records.len());
    let _ = writeln!(summary, "featurized: {}", ds.len());
    let _ = writeln!(summary, "skipped: {}", skipped.len());
    let _ = writeln!(summary, "candidate columns: {}", ds.columns.len());
    let _ = writeln!(summary, "native chromophore: {}", count("native_cro"));
    let _ = writeln!(summary, "registered triad: {}", count("registered_triad"));
    let _ = writeln!(summary, "empty neighbourhood: {}", count("empty_neighbourhood"));
    let _ = writeln!(summary, "outside modelled bands: {}", count("excluded_band"));
    let _ = writeln!(summary, "schema hash: {}", meta.schema_hash);
    for s in &skipped {
        let _ = writeln!(summary, "  skip {}: {}", s.id, s.reason);
    }
    output::write_text(&out.join(SUMMARY_TXT), &summary)?;
    log::info!("featurized {} of {} proteins", ds.len(), records.len());
    Ok(Outcome::from_skips(skipped.len()))
}
