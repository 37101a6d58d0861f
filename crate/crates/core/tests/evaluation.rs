use std::collections::BTreeSet;

use cromech_core::evaluate::cv::run_homology_eval;
use cromech_core::evaluate::kmer::Bucket;
use cromech_core::evaluate::{fold_plans, homology_split, kmer_jaccard, run_random_cv};
use cromech_core::synth::planted_dataset;
use cromech_core::{AblationCondition, Dataset, RunConfig};
use proptest::prelude::*;

fn quick_config(seeds: Vec<u64>) -> RunConfig {
    let mut cfg = RunConfig {
        seeds,
        ..RunConfig::default()
    };
    cfg.et.n_trees = 20;
    cfg
}

fn modelled(n: usize, seed: u64) -> Dataset {
    planted_dataset(n, seed).modelled()
}

#[test]
fn random_cv_predicts_every_row_once_per_seed() {
    let ds = modelled(80, 3);
    let cfg = quick_config(vec![0, 1, 2]);
    let plans = fold_plans(&ds.qy, &cfg.seeds, cfg.folds).unwrap();
    let res = run_random_cv(&ds, &AblationCondition::full(), &plans, &cfg).unwrap();
    assert_eq!(res.fits.len(), 3 * cfg.folds);
    for (seed, plan) in res.seeds.iter().zip(&plans) {
        assert_eq!(seed.fold_of, plan.fold_of);
        assert!(seed.oof.iter().all(Option::is_some));
        let m = seed.metrics.as_ref().unwrap();
        assert!(m.pearson_r > 0.0);
    }
    assert_eq!(res.oof_count(), 3 * ds.len());
}

#[test]
fn random_cv_is_reproducible() {
    let ds = modelled(60, 4);
    let cfg = quick_config(vec![7]);
    let plans = fold_plans(&ds.qy, &cfg.seeds, cfg.folds).unwrap();
    let a = run_random_cv(&ds, &AblationCondition::full(), &plans, &cfg).unwrap();
    let b = run_random_cv(&ds, &AblationCondition::full(), &plans, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn homology_membership_does_not_depend_on_seed() {
    let ds = modelled(120, 5);
    let split = homology_split(&ds.ids, &ds.sequences, 0.85).unwrap();
    let cfg = quick_config(vec![0, 1, 2]);
    let res = run_homology_eval(&ds, &split, &AblationCondition::full(), &cfg).unwrap();
    let test: BTreeSet<usize> = split
        .test_ids
        .iter()
        .map(|id| ds.ids.iter().position(|x| x == id).unwrap())
        .collect();
    for seed in &res.seeds {
        let predicted: BTreeSet<usize> = seed.predictions.keys().copied().collect();
        assert_eq!(predicted, test);
        for key in seed.metrics.keys() {
            assert!(key == "all" || Bucket::from_label(key).is_some(), "scope {key}");
        }
    }
    assert_ne!(res.seeds[0].predictions, res.seeds[1].predictions);
}

#[test]
fn split_thresholds_are_consistent_with_pairwise_similarity() {
    let ds = planted_dataset(90, 6);
    let split = homology_split(&ds.ids, &ds.sequences, 0.85).unwrap();
    let index = |id: &str| ds.ids.iter().position(|x| x == id).unwrap();
    for id in &split.train_ids {
        let i = index(id);
        let best = (0..ds.len())
            .filter(|&j| j != i)
            .map(|j| kmer_jaccard(&ds.sequences[i], &ds.sequences[j]).unwrap())
            .fold(0.0, f64::max);
        assert!(best >= 0.85);
    }
    for id in &split.test_ids {
        let i = index(id);
        let m = split
            .train_ids
            .iter()
            .map(|t| kmer_jaccard(&ds.sequences[i], &ds.sequences[index(t)]).unwrap())
            .fold(0.0, f64::max);
        assert_eq!(split.max_similarity[id], m);
        assert_eq!(split.bucket[id], Bucket::of(m));
    }
    let buckets: BTreeSet<Bucket> = split.bucket.values().copied().collect();
    assert_eq!(buckets.len(), 3, "planted data should populate every bucket");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn folds_partition_rows_and_balance_sizes(n in 10usize..120, k in 2usize..8, seed in any::<u64>()) {
        let y: Vec<f64> = (0..n).map(|i| ((i * 37) % 101) as f64 / 100.0).collect();
        let plan = &fold_plans(&y, &[seed], k).unwrap()[0];
        prop_assert_eq!(plan.fold_of.len(), n);
        let sizes: Vec<usize> = (0..k).map(|f| plan.test_rows(f).len()).collect();
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for f in 0..k {
            prop_assert_eq!(plan.test_rows(f).len() + plan.train_rows(f).len(), n);
        }
    }

    #[test]
    fn jaccard_is_symmetric_and_bounded(a in "[A-Y]{5,60}", b in "[A-Y]{5,60}") {
        let ab = kmer_jaccard(&a, &b).unwrap();
        prop_assert_eq!(ab, kmer_jaccard(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(kmer_jaccard(&a, &a).unwrap(), 1.0);
    }
}
