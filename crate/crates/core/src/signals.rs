//! Per-residue seed signals and the feature schema built on top of them.
//!
//! The seed table ships as a delimited data file (`data/seed_table.csv`): 20 standard
//! residues plus an `UNK` fallback row, 19 named signals each. Values come from standard
//! physicochemical scales:
//!
//! * `bulky`: side-chain heavy-atom count / 10
//! * `flex_risk`: ln(rotamer count) / ln(34), penultimate rotamer library counts
//! * `rotatable_burden`: side-chain chi-angle count (Pro counted as 0)
//! * `hydrophobic`: Kyte-Doolittle hydropathy rescaled to [0, 1]
//! * `bulky_contact`: `bulky * hydrophobic`
//! * `charge`: formal side-chain charge at neutral pH, His = +0.1
//! * `hbond_donor` / `hbond_acceptor`: side-chain donor / acceptor atom counts
//! * `aromatic`: Phe, Tyr, Trp, His
//! * `total_contact_burden`: (4 backbone + side-chain heavy atoms) / 14
//! * `aux_polarity`: Grantham polarity / 13; `aux_volume`: residue volume / 227.8 Å³
//! * `aux_net_hbond`: donors minus acceptors
//! * `is_*` and `aux_is_*`: residue identity flags
//!
//! The fallback row carries zero identity flags and the column means of every other
//! signal. These values are a count-consistent reconstruction, not a published table;
//! swap the file to experiment with other scales. Its SHA-256 is recorded in outputs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chromophore::{ClampDescriptors, Region};
use crate::error::{Error, Result};
use crate::graph::ChannelId;

pub const N_SIGNALS: usize = 19;

pub const SIGNAL_NAMES: [&str; N_SIGNALS] = [
    "bulky",
    "flex_risk",
    "rotatable_burden",
    "hydrophobic",
    "bulky_contact",
    "charge",
    "hbond_donor",
    "hbond_acceptor",
    "aromatic",
    "total_contact_burden",
    "is_PHE",
    "is_TYR",
    "is_HIS",
    "is_ALA",
    "aux_polarity",
    "aux_volume",
    "aux_is_GLY",
    "aux_is_PRO",
    "aux_net_hbond",
];

pub const STANDARD_RESIDUES: [&str; 20] = [
    "ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY", "HIS", "ILE", "LEU", "LYS", "MET",
    "PHE", "PRO", "SER", "THR", "TRP", "TYR", "VAL",
];

pub const FALLBACK_CODE: &str = "UNK";

/// Signals carried by the steric channel into the family pool.
pub const STERIC_FAMILY_SIGNALS: [&str; 10] = [
    "bulky",
    "flex_risk",
    "rotatable_burden",
    "charge",
    "hbond_donor",
    "hbond_acceptor",
    "aromatic",
    "is_PHE",
    "is_TYR",
    "is_HIS",
];

/// Signals carried by the hydrophobic channel into the family pool.
pub const HYDROPHOBIC_FAMILY_SIGNALS: [&str; 12] = [
    "hydrophobic",
    "bulky_contact",
    "charge",
    "hbond_donor",
    "hbond_acceptor",
    "aromatic",
    "is_PHE",
    "is_TYR",
    "is_HIS",
    "flex_risk",
    "total_contact_burden",
    "is_ALA",
];

pub fn signal_index(name: &str) -> Option<usize> {
    SIGNAL_NAMES.iter().position(|s| *s == name)
}

pub fn is_identity_signal(name: &str) -> bool {
    name.starts_with("is_") || name.starts_with("aux_is_")
}

const BUNDLED_TABLE: &str = include_str!("../data/seed_table.csv");

pub type SeedVector = [f64; N_SIGNALS];

#[derive(Debug, Clone, PartialEq)]
pub struct SeedTable {
    rows: BTreeMap<String, SeedVector>,
    fallback: SeedVector,
    hash: String,
}

impl SeedTable {
    pub fn bundled() -> Self {
        Self::from_csv_str(BUNDLED_TABLE).expect("bundled seed table is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr
            .headers()
            .map_err(|e| Error::SeedTable(e.to_string()))?
            .clone();
        let expected: Vec<&str> = std::iter::once("aa3").chain(SIGNAL_NAMES).collect();
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::SeedTable(format!(
                "header must be `{}`",
                expected.join(",")
            )));
        }
        let mut rows = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::SeedTable(e.to_string()))?;
            let code = rec[0].to_ascii_uppercase();
            let mut values = [0.0; N_SIGNALS];
            for (k, value) in values.iter_mut().enumerate() {
                let raw = &rec[k + 1];
                *value = raw
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| Error::SeedTable(format!("{code}: bad value `{raw}`")))?;
                if is_identity_signal(SIGNAL_NAMES[k]) && *value != 0.0 && *value != 1.0 {
                    return Err(Error::SeedTable(format!(
                        "{code}: identity signal {} must be 0 or 1",
                        SIGNAL_NAMES[k]
                    )));
                }
            }
            if rows.insert(code.clone(), values).is_some() {
                return Err(Error::SeedTable(format!("duplicate row {code}")));
            }
        }
        for code in STANDARD_RESIDUES.iter().chain([&FALLBACK_CODE]) {
            if !rows.contains_key(*code) {
                return Err(Error::SeedTable(format!("missing row {code}")));
            }
        }
        let fallback = rows.remove(FALLBACK_CODE).expect("checked above");
        if SIGNAL_NAMES
            .iter()
            .zip(fallback)
            .any(|(name, v)| is_identity_signal(name) && v != 0.0)
        {
            return Err(Error::SeedTable("fallback identity flags must be 0".into()));
        }
        Ok(Self {
            rows,
            fallback,
            hash: sha256_hex(text.as_bytes()),
        })
    }

    /// Seed vector for a residue code; unknown codes get the fallback row.
    pub fn seed_vector(&self, aa3: &str) -> SeedVector {
        self.rows.get(aa3).copied().unwrap_or(self.fallback)
    }

    pub fn fallback(&self) -> SeedVector {
        self.fallback
    }

    /// SHA-256 of the table's source text.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }
}

impl Default for SeedTable {
    fn default() -> Self {
        Self::bundled()
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn enrichment_column(channel: ChannelId, signal: &str, region: Region) -> String {
    format!("ch_{}__{}__{}", channel.name(), signal, region.name())
}

/// Parsed form of an enrichment column name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Enrichment {
        channel: ChannelId,
        signal: usize,
        region: Region,
    },
    Clamp(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub candidate_columns: Vec<String>,
    pub family_columns: Vec<String>,
    pub nonid_columns: Vec<String>,
}

impl FeatureSchema {
    pub const N_CANDIDATE: usize = 121;
    pub const N_FAMILY: usize = 73;
    pub const N_NONID: usize = 52;
    pub const N_ENRICHMENT: usize = N_SIGNALS * 2 * 3;

    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("schema serializes"))
    }

    pub fn candidate_index(&self, name: &str) -> Option<usize> {
        self.candidate_columns.iter().position(|c| c == name)
    }

    /// Columns that were mapped to a family but never enter the pool.
    pub fn unused_columns(&self) -> Vec<&str> {
        self.candidate_columns
            .iter()
            .filter(|c| !self.family_columns.contains(c))
            .map(String::as_str)
            .collect()
    }

    pub fn kind(name: &str) -> Option<ColumnKind> {
        if let Some(k) = ClampDescriptors::NAMES.iter().position(|c| *c == name) {
            return Some(ColumnKind::Clamp(k));
        }
        let rest = name.strip_prefix("ch_")?;
        let mut parts = rest.split("__");
        let (ch, sig, reg) = (parts.next()?, parts.next()?, parts.next()?);
        if parts.next().is_some() {
            return None;
        }
        let channel = ChannelId::ACTIVATED.into_iter().find(|c| c.name() == ch)?;
        let region = Region::ALL.into_iter().find(|r| r.name() == reg)?;
        Some(ColumnKind::Enrichment {
            channel,
            signal: signal_index(sig)?,
            region,
        })
    }
}

/// Build the 121-column candidate schema, its 73-column family mapping and the
/// 52-column non-identity pool.
pub fn family_mapping() -> FeatureSchema {
    let mut candidate = Vec::with_capacity(FeatureSchema::N_CANDIDATE);
    let mut family = Vec::with_capacity(FeatureSchema::N_FAMILY);
    for channel in ChannelId::ACTIVATED {
        let mapped: &[&str] = match channel {
            ChannelId::Steric => &STERIC_FAMILY_SIGNALS,
            ChannelId::Hydrophobic => &HYDROPHOBIC_FAMILY_SIGNALS,
            _ => unreachable!("only activated channels"),
        };
        for region in Region::ALL {
            for signal in SIGNAL_NAMES {
                let col = enrichment_column(channel, signal, region);
                if mapped.contains(&signal) {
                    family.push(col.clone());
                }
                candidate.push(col);
            }
        }
    }
    for clamp in ClampDescriptors::NAMES {
        candidate.push(clamp.to_string());
        family.push(clamp.to_string());
    }
    let nonid = family
        .iter()
        .filter(|c| match FeatureSchema::kind(c) {
            Some(ColumnKind::Enrichment { signal, .. }) => !is_identity_signal(SIGNAL_NAMES[signal]),
            _ => true,
        })
        .cloned()
        .collect();
    let schema = FeatureSchema {
        candidate_columns: candidate,
        family_columns: family,
        nonid_columns: nonid,
    };
    assert_eq!(schema.candidate_columns.len(), FeatureSchema::N_CANDIDATE);
    assert_eq!(schema.family_columns.len(), FeatureSchema::N_FAMILY);
    assert_eq!(schema.nonid_columns.len(), FeatureSchema::N_NONID);
    schema
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(table: &SeedTable, aa: &str, name: &str) -> f64 {
        table.seed_vector(aa)[signal_index(name).unwrap()]
    }

    #[test]
    fn tyrosine_flags() {
        let t = SeedTable::bundled();
        assert_eq!(sig(&t, "TYR", "is_TYR"), 1.0);
        assert_eq!(sig(&t, "TYR", "aromatic"), 1.0);
        assert!(sig(&t, "TYR", "hbond_donor") >= 1.0);
    }

    #[test]
    fn glycine_has_no_rotatable_burden() {
        assert_eq!(sig(&SeedTable::bundled(), "GLY", "rotatable_burden"), 0.0);
    }

    #[test]
    fn unknown_code_uses_fallback() {
        let t = SeedTable::bundled();
        let v = t.seed_vector("XYZ");
        assert_eq!(v, t.fallback());
        for (name, value) in SIGNAL_NAMES.iter().zip(v) {
            if is_identity_signal(name) {
                assert_eq!(value, 0.0, "{name}");
            }
        }
    }

    #[test]
    fn fallback_non_identity_signals_are_column_means() {
        let t = SeedTable::bundled();
        for (k, name) in SIGNAL_NAMES.iter().enumerate() {
            if is_identity_signal(name) {
                continue;
            }
            let mean: f64 = STANDARD_RESIDUES.iter().map(|aa| t.seed_vector(aa)[k]).sum::<f64>() / 20.0;
            assert!((t.fallback()[k] - mean).abs() < 1e-6, "{name}");
        }
    }

    #[test]
    fn identity_signals_are_binary() {
        let t = SeedTable::bundled();
        for aa in STANDARD_RESIDUES {
            for (name, v) in SIGNAL_NAMES.iter().zip(t.seed_vector(aa)) {
                if is_identity_signal(name) {
                    assert!(v == 0.0 || v == 1.0);
                }
            }
        }
    }

    #[test]
    fn table_hash_is_stable_and_content_sensitive() {
        let a = SeedTable::bundled();
        assert_eq!(a.hash(), SeedTable::bundled().hash());
        assert_eq!(a.hash().len(), 64);
        let edited = BUNDLED_TABLE.replacen("ALA,0.1,", "ALA,0.2,", 1);
        assert_ne!(SeedTable::from_csv_str(&edited).unwrap().hash(), a.hash());
    }

    #[test]
    fn malformed_tables_rejected() {
        assert!(SeedTable::from_csv_str("aa3,bulky\nALA,1\n").is_err());
        let no_unk: String = BUNDLED_TABLE.lines().filter(|l| !l.starts_with("UNK")).collect::<Vec<_>>().join("\n");
        assert!(SeedTable::from_csv_str(&no_unk).is_err());
        let bad_flag = BUNDLED_TABLE.replacen("PHE,0.7,0.393123,2,0.811111,0.567778,0,0,0,1,0.785714,1,", "PHE,0.7,0.393123,2,0.811111,0.567778,0,0,0,1,0.785714,0.5,", 1);
        assert_ne!(bad_flag, BUNDLED_TABLE);
        assert!(SeedTable::from_csv_str(&bad_flag).is_err());
    }

    #[test]
    fn counting_identities() {
        let s = family_mapping();
        assert_eq!(s.candidate_columns.len(), 19 * 2 * 3 + 7);
        assert_eq!(s.family_columns.len(), 66 + 7);
        assert_eq!(s.nonid_columns.len(), 73 - 21);
        assert_eq!(s.unused_columns().len(), (19 - 10) * 3 + (19 - 12) * 3);
        let count = |ch: ChannelId| {
            s.nonid_columns
                .iter()
                .filter(|c| matches!(FeatureSchema::kind(c), Some(ColumnKind::Enrichment { channel, .. }) if channel == ch))
                .count()
        };
        assert_eq!(count(ChannelId::Steric), 21);
        assert_eq!(count(ChannelId::Hydrophobic), 24);
    }

    #[test]
    fn no_identity_shortcut_in_pool() {
        let s = family_mapping();
        assert!(s.nonid_columns.iter().all(|c| !c.contains("is_")));
        assert!(s.family_columns.iter().all(|c| !c.contains("aux_")));
    }

    #[test]
    fn candidate_order_is_channel_region_signal() {
        let s = family_mapping();
        assert_eq!(s.candidate_columns[0], "ch_steric__bulky__phenolate");
        assert_eq!(s.candidate_columns[19], "ch_steric__bulky__bridge");
        assert_eq!(s.candidate_columns[57], "ch_hydrophobic__bulky__phenolate");
        assert_eq!(s.candidate_columns[113], "ch_hydrophobic__aux_net_hbond__imidazolinone");
        assert_eq!(s.candidate_columns[114], "clamp_phenolate_contact");
        assert_eq!(s.hash(), family_mapping().hash());
    }

    #[test]
    fn column_kind_round_trip() {
        let s = family_mapping();
        for (i, c) in s.candidate_columns.iter().enumerate() {
            match FeatureSchema::kind(c).unwrap() {
                ColumnKind::Enrichment { channel, signal, region } => {
                    let ch = ChannelId::ACTIVATED.iter().position(|x| *x == channel).unwrap();
                    assert_eq!(i, ch * 57 + region.index() * 19 + signal);
                }
                ColumnKind::Clamp(k) => assert_eq!(i, 114 + k),
            }
        }
        assert!(FeatureSchema::kind("qy").is_none());
    }
}
