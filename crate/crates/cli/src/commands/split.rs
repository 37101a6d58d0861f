use std::fmt::Write as _;
use std::path::Path;

use cromech_core::evaluate::{homology_split, Bucket};
use cromech_core::{assign_band, load_metadata, SplitPlan};

use crate::error::{io, CliError, Result};
use crate::output::{self, SPLIT_JSON, SUMMARY_TXT};
use crate::sidecar::RunSidecar;
use crate::{Outcome, SplitArgs};

pub const SPLIT_CSV: &str = "split.csv";

pub fn write_split(plan: &SplitPlan, excluded: &[String], dir: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(plan)? + "\n";
    output::write_text(&dir.join(SPLIT_JSON), &json)?;

    let path = dir.join(SPLIT_CSV);
    let mut w = output::csv_writer(&path)?;
    w.write_record(["id", "partition", "max_jaccard", "bucket"])?;
    for id in &plan.train_ids {
        w.write_record([id.as_str(), "train", "", ""])?;
    }
    for id in &plan.test_ids {
        w.write_record([
            id.clone(),
            "test".into(),
            plan.max_similarity[id].to_string(),
            plan.bucket[id].label().to_string(),
        ])?;
    }
    for id in excluded {
        w.write_record([id.as_str(), "excluded", "", ""])?;
    }
    w.flush().map_err(|e| io(&path, e))
}

pub fn read_split(dir: &Path) -> Result<SplitPlan> {
    let path = dir.join(SPLIT_JSON);
    let text = std::fs::read_to_string(&path).map_err(|e| io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn split_summary(plan: &SplitPlan, excluded: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "homology split (5-mer Jaccard, tau = {})", plan.tau);
    let _ = writeln!(s, "train: {}", plan.train_ids.len());
    let _ = writeln!(s, "test: {}", plan.test_ids.len());
    for b in Bucket::ALL {
        let _ = writeln!(s, "  bucket {}: {}", b.label(), plan.bucket_ids(b).len());
    }
    let _ = writeln!(s, "outside modelled bands (not split): {excluded}");
    s
}

pub fn run(args: &SplitArgs) -> Result<Outcome> {
    let mut cfg = args.common.resolve()?;
    if let Some(m) = &args.metadata {
        cfg.paths.metadata = Some(m.clone());
    }
    let metadata = cfg
        .paths
        .metadata
        .clone()
        .ok_or_else(|| CliError::Usage("--metadata is required".into()))?;
    let out = &args.common.out;
    output::ensure_dir(out)?;

    let records = load_metadata(&metadata)?;
    let (kept, excluded): (Vec<_>, Vec<_>) = records.iter().partition(|r| assign_band(r.emission_nm).is_modelled());
    let ids: Vec<String> = kept.iter().map(|r| r.id.clone()).collect();
    let seqs: Vec<&str> = kept.iter().map(|r| r.sequence.as_str()).collect();
    let plan = homology_split(&ids, &seqs, cfg.jaccard_tau)?;
    let excluded_ids: Vec<String> = excluded.iter().map(|r| r.id.clone()).collect();

    write_split(&plan, &excluded_ids, out)?;
    let seed_hash = super::seed_table(&cfg)?.hash().to_string();
    RunSidecar::new("split", &cfg, &seed_hash)
        .input("metadata", &metadata)?
        .write(out)?;
    output::write_text(&out.join(SUMMARY_TXT), &split_summary(&plan, excluded_ids.len()))?;
    Ok(Outcome::Success)
}
