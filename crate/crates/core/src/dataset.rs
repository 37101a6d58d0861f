//! In-memory featurized dataset and its on-disk feature table.
//!
//! The table is comma-delimited with header `id,sequence,emission_nm,qy` followed by the
//! 121 candidate columns. Floats are written in shortest round-trip form, so a table read
//! back reproduces every value exactly.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::ingest::ProteinRecord;
use crate::model::{assign_band, Band};
use crate::propagate::FeatureVector;
use crate::signals::{family_mapping, sha256_hex};

const LEADING: [&str; 4] = ["id", "sequence", "emission_nm", "qy"];

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub ids: Vec<String>,
    pub sequences: Vec<String>,
    pub emission_nm: Vec<f64>,
    pub qy: Vec<f64>,
    /// Candidate column names, identical to the schema's candidate list.
    pub columns: Vec<String>,
    /// Row-major candidate features.
    pub x: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn band(&self, row: usize) -> Band {
        assign_band(self.emission_nm[row])
    }

    pub fn bands(&self) -> Vec<Band> {
        (0..self.len()).map(|i| self.band(i)).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.x.iter().map(|r| r[j]).collect()
    }

    /// Join featurized proteins with their metadata, keeping metadata order.
    pub fn from_features(records: &[ProteinRecord], features: &[FeatureVector]) -> Self {
        let by_id: BTreeMap<&str, &FeatureVector> =
            features.iter().map(|f| (f.protein_id.as_str(), f)).collect();
        let mut ds = Self::empty();
        for rec in records {
            if let Some(f) = by_id.get(rec.id.as_str()) {
                ds.push(rec.id.clone(), rec.sequence.clone(), rec.emission_nm, rec.qy, f.values.clone());
            }
        }
        ds
    }

    pub fn empty() -> Self {
        Self {
            ids: Vec::new(),
            sequences: Vec::new(),
            emission_nm: Vec::new(),
            qy: Vec::new(),
            columns: family_mapping().candidate_columns,
            x: Vec::new(),
        }
    }

    pub fn push(&mut self, id: String, sequence: String, emission_nm: f64, qy: f64, values: Vec<f64>) {
        assert_eq!(values.len(), self.columns.len(), "feature row width");
        self.ids.push(id);
        self.sequences.push(sequence);
        self.emission_nm.push(emission_nm);
        self.qy.push(qy);
        self.x.push(values);
    }

    /// Rows at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            sequences: idx.iter().map(|&i| self.sequences[i].clone()).collect(),
            emission_nm: idx.iter().map(|&i| self.emission_nm[i]).collect(),
            qy: idx.iter().map(|&i| self.qy[i]).collect(),
            columns: self.columns.clone(),
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
        }
    }

    /// Rows whose emission falls in a modelled band.
    pub fn modelled(&self) -> Self {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.band(i).is_modelled()).collect();
        self.subset(&idx)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header = LEADING.iter().copied().chain(self.columns.iter().map(String::as_str));
        w.write_record(header).map_err(csv_err)?;
        for i in 0..self.len() {
            let mut rec = vec![
                self.ids[i].clone(),
                self.sequences[i].clone(),
                self.emission_nm[i].to_string(),
                self.qy[i].to_string(),
            ];
            rec.extend(self.x[i].iter().map(f64::to_string));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Metadata(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers().map_err(csv_err)?.clone();
        for (k, name) in LEADING.iter().enumerate() {
            if headers.get(k) != Some(name) {
                return Err(Error::MissingColumn((*name).into()));
            }
        }
        let columns: Vec<String> = headers.iter().skip(LEADING.len()).map(str::to_string).collect();
        if columns != family_mapping().candidate_columns {
            return Err(Error::InvalidConfig("feature table columns do not match the schema".into()));
        }
        let mut ds = Self::empty();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let num = |k: usize| -> Result<f64> {
                rec[k].parse().map_err(|_| Error::MalformedRecord {
                    line: row + 2,
                    reason: format!("column {} is not a number: `{}`", &headers[k], &rec[k]),
                })
            };
            let values = (LEADING.len()..rec.len()).map(num).collect::<Result<Vec<f64>>>()?;
            ds.push(rec[0].to_string(), rec[1].to_string(), num(2)?, num(3)?, values);
        }
        Ok(ds)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Metadata(e.to_string())
}

/// Why a protein did not make it into the feature table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedRow {
    pub id: String,
    pub reason: String,
}

/// Metadata written next to a feature table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTableMeta {
    pub schema_hash: String,
    pub seed_table_hash: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub n_rows: usize,
    pub skipped: Vec<SkippedRow>,
    /// Per-protein featurization flags.
    pub flags: BTreeMap<String, Vec<String>>,
}

impl FeatureTableMeta {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// SHA-256 of a file's bytes.
pub fn file_hash(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}
