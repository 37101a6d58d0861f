//! Quantile-stratified fold assignment.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_CV_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    pub n_folds: usize,
    /// Number of quantile bins.
    pub q: usize,
    /// Fold index of each row, aligned with the target vector.
    pub fold_of: Vec<usize>,
}

impl FoldPlan {
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }
}

/// Quantile bin of each row: rows are ranked by `y` (equal values keep index order) and
/// rank `r` goes to bin `⌊r·Q/n⌋`, with `Q = min(5, ⌊n/5⌋)`.
pub fn quantile_bins(y: &[f64]) -> (usize, Vec<usize>) {
    let n = y.len();
    let q = (n / 5).clamp(1, 5);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(a.cmp(&b)));
    let mut bin = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        bin[i] = rank * q / n;
    }
    (q, bin)
}

/// Stratified folds: each quantile bin is shuffled with the seeded generator and dealt
/// round-robin, the dealing position carrying over from one bin to the next.
pub fn make_folds(y: &[f64], n_folds: usize, seed: u64) -> Result<FoldPlan> {
    if y.len() < MIN_CV_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_CV_SAMPLES,
            got: y.len(),
        });
    }
    if n_folds < 2 {
        return Err(Error::InvalidConfig("at least two folds are required".into()));
    }
    let (q, bin) = quantile_bins(y);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; y.len()];
    let mut next = 0;
    for b in 0..q {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| bin[i] == b).collect();
        members.shuffle(&mut rng);
        for i in members {
            fold_of[i] = next % n_folds;
            next += 1;
        }
    }
    Ok(FoldPlan {
        seed,
        n_folds,
        q,
        fold_of,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_five_rows_one_per_bin_per_fold() {
        let y: Vec<f64> = (1..=25).map(|i| i as f64 / 25.0).collect();
        let plan = make_folds(&y, 5, 3).unwrap();
        assert_eq!(plan.q, 5);
        let (_, bin) = quantile_bins(&y);
        for b in 0..5 {
            let mut folds: Vec<usize> = (0..25).filter(|&i| bin[i] == b).map(|i| plan.fold_of[i]).collect();
            folds.sort();
            assert_eq!(folds, vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn bin_count_rule() {
        assert_eq!(quantile_bins(&[0.0; 12]).0, 2);
        assert_eq!(quantile_bins(&[0.0; 24]).0, 4);
        assert_eq!(quantile_bins(&[0.0; 531]).0, 5);
    }

    #[test]
    fn ties_keep_index_order() {
        let (_, bin) = quantile_bins(&[0.5; 10]);
        assert_eq!(bin, vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let y: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64).collect();
        assert_eq!(make_folds(&y, 5, 1).unwrap(), make_folds(&y, 5, 1).unwrap());
        assert_ne!(make_folds(&y, 5, 1).unwrap().fold_of, make_folds(&y, 5, 2).unwrap().fold_of);
    }

    #[test]
    fn fold_sizes_balanced_within_bins() {
        let y: Vec<f64> = (0..53).map(|i| ((i * 17) % 23) as f64).collect();
        let plan = make_folds(&y, 5, 9).unwrap();
        let (q, bin) = quantile_bins(&y);
        for b in 0..q {
            let mut counts = [0usize; 5];
            for i in (0..53).filter(|&i| bin[i] == b) {
                counts[plan.fold_of[i]] += 1;
            }
            assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }
        let mut totals = [0usize; 5];
        for f in &plan.fold_of {
            totals[*f] += 1;
        }
        assert!(totals.iter().max().unwrap() - totals.iter().min().unwrap() <= 1);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            make_folds(&[0.1; 9], 5, 0),
            Err(Error::TooFewSamples { needed: 10, got: 9 })
        ));
    }
}
