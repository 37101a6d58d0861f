//! Extremely randomized trees for regression.
//!
//! Trees are grown on the full training set (no bootstrap). At each node every candidate
//! feature gets one cut-point drawn uniformly inside the node's observed range, and the
//! cut with the largest variance reduction is kept. Nodes with fewer than
//! `min_samples_split` rows or a constant target become leaves holding the mean target.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EtRegressorConfig {
    pub n_trees: usize,
    /// Features examined per split; `None` examines every feature.
    pub candidate_features_per_split: Option<usize>,
    pub min_samples_split: usize,
    pub rng_seed: u64,
}

impl Default for EtRegressorConfig {
    fn default() -> Self {
        Self {
            n_trees: 300,
            candidate_features_per_split: None,
            min_samples_split: 2,
            rng_seed: 0,
        }
    }
}

const LEAF: u32 = u32::MAX;

/// Flat array representation; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    feature: Vec<u32>,
    threshold: Vec<f64>,
    left: Vec<u32>,
    right: Vec<u32>,
    value: Vec<f64>,
}

impl Tree {
    pub fn node_count(&self) -> usize {
        self.feature.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.feature.iter().filter(|f| **f == LEAF).count()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = 0usize;
        loop {
            let f = self.feature[node];
            if f == LEAF {
                return self.value[node];
            }
            node = if x[f as usize] <= self.threshold[node] {
                self.left[node]
            } else {
                self.right[node]
            } as usize;
        }
    }

    fn push_leaf(&mut self, value: f64) -> usize {
        self.feature.push(LEAF);
        self.threshold.push(0.0);
        self.left.push(LEAF);
        self.right.push(LEAF);
        self.value.push(value);
        self.feature.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraTrees {
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

impl ExtraTrees {
    /// Fit on row-major `x` (all rows the same width) and target `y`.
    pub fn fit(x: &[Vec<f64>], y: &[f64], cfg: &EtRegressorConfig) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(format!("{} rows vs {} targets", x.len(), y.len())));
        }
        if x.is_empty() {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        if cfg.n_trees == 0 {
            return Err(Error::InvalidConfig("n_trees must be at least 1".into()));
        }
        let n_features = x[0].len();
        if x.iter().any(|r| r.len() != n_features) {
            return Err(Error::LengthMismatch("ragged feature rows".into()));
        }
        let columns: Vec<Vec<f64>> = (0..n_features)
            .map(|j| x.iter().map(|row| row[j]).collect())
            .collect();
        let trees = (0..cfg.n_trees)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ i as u64);
                let mut builder = Builder {
                    columns: &columns,
                    y,
                    cfg,
                    rng: &mut rng,
                    tree: Tree {
                        feature: Vec::new(),
                        threshold: Vec::new(),
                        left: Vec::new(),
                        right: Vec::new(),
                        value: Vec::new(),
                    },
                };
                let mut idx: Vec<usize> = (0..y.len()).collect();
                builder.grow(&mut idx);
                builder.tree
            })
            .collect();
        Ok(Self { n_features, trees })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let (mut sum, mut lo, mut hi) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
        for t in &self.trees {
            let p = t.predict(x);
            sum += p;
            lo = lo.min(p);
            hi = hi.max(p);
        }
        // The mean of identical outputs must be that output, not a rounded sum.
        (sum / self.trees.len() as f64).clamp(lo, hi)
    }
}

struct Builder<'a, R> {
    columns: &'a [Vec<f64>],
    y: &'a [f64],
    cfg: &'a EtRegressorConfig,
    rng: &'a mut R,
    tree: Tree,
}

struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl<R: Rng> Builder<'_, R> {
    fn grow(&mut self, idx: &mut [usize]) -> usize {
        let n = idx.len();
        let sum: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let mean = sum / n as f64;
        let first = self.y[idx[0]];
        if idx.iter().all(|&i| self.y[i] == first) {
            return self.tree.push_leaf(first);
        }
        if n < self.cfg.min_samples_split {
            return self.tree.push_leaf(mean);
        }
        let Some(split) = self.best_split(idx, sum) else {
            return self.tree.push_leaf(mean);
        };

        let col = &self.columns[split.feature];
        let mut mid = 0;
        for k in 0..n {
            if col[idx[k]] <= split.threshold {
                idx.swap(k, mid);
                mid += 1;
            }
        }
        debug_assert!(mid > 0 && mid < n);

        let node = self.tree.push_leaf(mean);
        self.tree.feature[node] = split.feature as u32;
        self.tree.threshold[node] = split.threshold;
        let (left_idx, right_idx) = idx.split_at_mut(mid);
        let left = self.grow(left_idx);
        let right = self.grow(right_idx);
        self.tree.left[node] = left as u32;
        self.tree.right[node] = right as u32;
        node
    }

    fn best_split(&mut self, idx: &[usize], total: f64) -> Option<Split> {
        let n_features = self.columns.len();
        let quota = self
            .cfg
            .candidate_features_per_split
            .unwrap_or(n_features)
            .clamp(1, n_features.max(1));
        let mut order: Vec<usize> = (0..n_features).collect();
        if quota < n_features {
            order.shuffle(self.rng);
        }

        let n = idx.len() as f64;
        let mut best: Option<Split> = None;
        let mut examined = 0;
        for f in order {
            if examined == quota {
                break;
            }
            let col = &self.columns[f];
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in idx {
                lo = lo.min(col[i]);
                hi = hi.max(col[i]);
            }
            if lo >= hi {
                continue;
            }
            examined += 1;
            let mut cut = self.rng.random_range(lo..hi);
            if cut >= hi {
                cut = lo;
            }
            let (mut left_sum, mut left_n) = (0.0, 0usize);
            for &i in idx {
                if col[i] <= cut {
                    left_sum += self.y[i];
                    left_n += 1;
                }
            }
            let right_n = idx.len() - left_n;
            let right_sum = total - left_sum;
            // Maximising this is equivalent to maximising the SSE reduction.
            let score = left_sum * left_sum / left_n as f64 + right_sum * right_sum / right_n as f64
                - total * total / n;
            if best.as_ref().is_none_or(|b| score > b.score) {
                best = Some(Split {
                    feature: f,
                    threshold: cut,
                    score,
                });
            }
        }
        best
    }
}
