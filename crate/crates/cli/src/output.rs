//! File helpers shared by the commands.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use cromech_core::dataset::FeatureTableMeta;
use cromech_core::{family_mapping, Dataset};

use crate::error::{io, CliError, Result};

pub const FEATURES_CSV: &str = "features.csv";
pub const FEATURES_META: &str = "features.meta.json";
pub const SPLIT_JSON: &str = "split.json";
pub const METRICS_CSV: &str = "metrics.csv";
pub const RECURRENCE_CSV: &str = "recurrence.csv";
pub const SUMMARY_TXT: &str = "summary.txt";

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io(path, e))
}

pub fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io(path, e))
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

/// A featurize output directory, loaded and checked against this build's schema.
pub struct FeatureTable {
    pub csv: PathBuf,
    pub meta: FeatureTableMeta,
    pub dataset: Dataset,
}

impl FeatureTable {
    pub fn load(dir: &Path) -> Result<Self> {
        let csv = dir.join(FEATURES_CSV);
        let meta_path = dir.join(FEATURES_META);
        if !csv.is_file() || !meta_path.is_file() {
            return Err(CliError::MissingFeatureTable(dir.to_path_buf()));
        }
        let meta = FeatureTableMeta::load(&meta_path)?;
        let expected = family_mapping().hash();
        if meta.schema_hash != expected {
            return Err(CliError::ConfigMismatch {
                expected,
                found: meta.schema_hash,
            });
        }
        let dataset = Dataset::load(&csv)?;
        if dataset.columns != family_mapping().candidate_columns {
            return Err(CliError::ConfigMismatch {
                expected,
                found: "feature table columns differ from the schema".into(),
            });
        }
        Ok(Self { csv, meta, dataset })
    }

    /// Rows whose emission falls in a modelled band.
    pub fn modelled(&self) -> Dataset {
        self.dataset.modelled()
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
