//! 5-mer Jaccard similarity and the fixed homology-controlled split.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const KMER_LEN: usize = 5;

/// Sorted unique 5-mers of `seq`, each packed into the low 40 bits of a `u64`.
pub fn kmer_set(seq: &str) -> Vec<u64> {
    let mut set: Vec<u64> = seq
        .as_bytes()
        .windows(KMER_LEN)
        .map(|w| w.iter().fold(0u64, |acc, &b| (acc << 8) | b as u64))
        .collect();
    set.sort_unstable();
    set.dedup();
    set
}

fn sorted_jaccard(a: &[u64], b: &[u64]) -> f64 {
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// |K5(a) ∩ K5(b)| / |K5(a) ∪ K5(b)| over unique 5-mer sets.
pub fn kmer_jaccard(seq_a: &str, seq_b: &str) -> Result<f64> {
    for s in [seq_a, seq_b] {
        if s.len() < KMER_LEN {
            return Err(Error::SequenceTooShort {
                id: s.to_string(),
                len: s.len(),
            });
        }
    }
    Ok(sorted_jaccard(&kmer_set(seq_a), &kmer_set(seq_b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bucket {
    #[serde(rename = "70–85")]
    B70_85,
    #[serde(rename = "50–70")]
    B50_70,
    #[serde(rename = "<50")]
    Blt50,
}

impl Bucket {
    pub const ALL: [Bucket; 3] = [Bucket::B70_85, Bucket::B50_70, Bucket::Blt50];

    pub fn label(self) -> &'static str {
        match self {
            Bucket::B70_85 => "70–85",
            Bucket::B50_70 => "50–70",
            Bucket::Blt50 => "<50",
        }
    }

    /// Bucket for a test protein's maximum similarity to the training set. Intervals are
    /// closed below and open above.
    pub fn of(m: f64) -> Bucket {
        if m >= 0.70 {
            Bucket::B70_85
        } else if m >= 0.50 {
            Bucket::B50_70
        } else {
            Bucket::Blt50
        }
    }

    pub fn from_label(s: &str) -> Option<Bucket> {
        let key = s.replace('-', "–");
        Self::ALL.into_iter().find(|b| b.label() == key || format!("{b:?}") == s)
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub tau: f64,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    /// Maximum 5-mer Jaccard from each test protein to the training set.
    pub max_similarity: BTreeMap<String, f64>,
    pub bucket: BTreeMap<String, Bucket>,
}

impl SplitPlan {
    pub fn bucket_ids(&self, bucket: Bucket) -> Vec<&str> {
        self.test_ids
            .iter()
            .filter(|id| self.bucket[*id] == bucket)
            .map(String::as_str)
            .collect()
    }
}

/// Assign proteins with a close neighbour (max Jaccard to any other protein ≥ `tau`) to
/// the training set and bucket the rest by their maximum similarity to that set. Input
/// order is preserved within both partitions. With an empty training set every test
/// protein has similarity 0.
pub fn homology_split<S: AsRef<str> + Sync>(ids: &[String], sequences: &[S], tau: f64) -> Result<SplitPlan> {
    if ids.len() != sequences.len() {
        return Err(Error::LengthMismatch(format!("{} ids vs {} sequences", ids.len(), sequences.len())));
    }
    if ids.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: ids.len() });
    }
    for (id, s) in ids.iter().zip(sequences) {
        if s.as_ref().len() < KMER_LEN {
            return Err(Error::SequenceTooShort {
                id: id.clone(),
                len: s.as_ref().len(),
            });
        }
    }
    let sets: Vec<Vec<u64>> = sequences.par_iter().map(|s| kmer_set(s.as_ref())).collect();
    let n = sets.len();
    let sim: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| if i == j { f64::NAN } else { sorted_jaccard(&sets[i], &sets[j]) }).collect())
        .collect();

    let is_train: Vec<bool> = (0..n)
        .map(|i| (0..n).any(|j| j != i && sim[i][j] >= tau))
        .collect();
    let mut plan = SplitPlan {
        tau,
        train_ids: Vec::new(),
        test_ids: Vec::new(),
        max_similarity: BTreeMap::new(),
        bucket: BTreeMap::new(),
    };
    for i in 0..n {
        if is_train[i] {
            plan.train_ids.push(ids[i].clone());
            continue;
        }
        let m = (0..n).filter(|&j| is_train[j]).map(|j| sim[i][j]).fold(0.0, f64::max);
        plan.test_ids.push(ids[i].clone());
        plan.max_similarity.insert(ids[i].clone(), m);
        plan.bucket.insert(ids[i].clone(), Bucket::of(m));
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jaccard_examples() {
        assert_eq!(kmer_jaccard("MSKGEELF", "MSKGEELF").unwrap(), 1.0);
        assert_eq!(kmer_jaccard("ABCDEF", "ABCDE").unwrap(), 0.5);
        assert_eq!(kmer_jaccard("AAAAAA", "CCCCCC").unwrap(), 0.0);
        assert!(matches!(kmer_jaccard("ABCD", "ABCDE"), Err(Error::SequenceTooShort { len: 4, .. })));
    }

    #[test]
    fn repeated_kmers_count_once() {
        assert_eq!(kmer_set("AAAAAAAAA").len(), 1);
        assert_eq!(kmer_jaccard("AAAAAAAA", "AAAAA").unwrap(), 1.0);
    }

    #[test]
    fn bucket_boundaries_are_half_open() {
        assert_eq!(Bucket::of(0.72), Bucket::B70_85);
        assert_eq!(Bucket::of(0.70), Bucket::B70_85);
        assert_eq!(Bucket::of(0.6999999), Bucket::B50_70);
        assert_eq!(Bucket::of(0.50), Bucket::B50_70);
        assert_eq!(Bucket::of(0.49), Bucket::Blt50);
        assert_eq!(Bucket::of(0.0), Bucket::Blt50);
    }

    #[test]
    fn bucket_labels_parse() {
        for b in Bucket::ALL {
            assert_eq!(Bucket::from_label(b.label()), Some(b));
        }
        assert_eq!(Bucket::from_label("70-85"), Some(Bucket::B70_85));
        assert_eq!(Bucket::from_label("Blt50"), Some(Bucket::Blt50));
    }

    #[test]
    fn identical_pair_goes_to_train() {
        let ids = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let plan = homology_split(&ids, &["MSKGEELFTG", "MSKGEELFTG", "WWWWWWWW"], 0.85).unwrap();
        assert_eq!(plan.train_ids, vec!["a", "b"]);
        assert_eq!(plan.test_ids, vec!["c"]);
        assert_eq!(plan.bucket["c"], Bucket::Blt50);
    }

    #[test]
    fn empty_training_set_means_zero_similarity() {
        let ids = vec!["a".to_string(), "b".to_string()];
        let plan = homology_split(&ids, &["ABCDEFGH", "ABCDEFGX"], 0.85).unwrap();
        assert!(plan.train_ids.is_empty());
        assert_eq!(plan.max_similarity["a"], 0.0);
    }
}
