mod common;

use std::path::Path;

use common::{cli, s, write_fixture};
use cromech_cli::output::FeatureTable;
use cromech_cli::sidecar::RunSidecar;
use cromech_core::dataset::FeatureTableMeta;
use cromech_core::family_mapping;

fn featurize(fx: &common::Fixture, out: &Path) -> i32 {
    cli(&[
        "featurize",
        "--metadata",
        s(&fx.metadata),
        "--structures",
        s(&fx.structures),
        "--config",
        s(&fx.config),
        "--out",
        s(out),
    ])
}

#[test]
fn featurize_three_valid_structures() {
    let dir = tempfile::tempdir().unwrap();
    let fx = write_fixture(dir.path(), 3, 0, 1);
    let out = dir.path().join("features");
    assert_eq!(featurize(&fx, &out), 0);
    let table = FeatureTable::load(&out).unwrap();
    assert_eq!(table.dataset.len(), 3);
    assert_eq!(table.dataset.columns.len(), 121);
    let sidecar = RunSidecar::read(&out).unwrap();
    assert_eq!(sidecar.schema_hash, family_mapping().hash());
    assert_eq!(sidecar.command, "featurize");
    assert_eq!(sidecar.config.seeds, vec![0, 1]);
    assert!(sidecar.inputs.contains_key("metadata"));
}

#[test]
fn featurize_partial_failure_is_logged() {
    let dir = tempfile::tempdir().unwrap();
    let fx = write_fixture(dir.path(), 2, 1, 2);
    let out = dir.path().join("features");
    assert_eq!(featurize(&fx, &out), 2);
    let table = FeatureTable::load(&out).unwrap();
    assert_eq!(table.dataset.len(), 2);
    assert_eq!(table.meta.skipped.len(), 1);
    assert_eq!(table.meta.skipped[0].id, "fp002");
    assert!(table.meta.skipped[0].reason.starts_with("no_chromophore"));
    let skipped = std::fs::read_to_string(out.join("skipped.csv")).unwrap();
    assert_eq!(skipped.lines().count(), 2);
}

#[test]
fn featurize_all_failed_is_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let fx = write_fixture(dir.path(), 0, 2, 3);
    assert_eq!(featurize(&fx, &dir.path().join("features")), 1);
}

#[test]
fn split_identical_pair_lands_in_train() {
    let dir = tempfile::tempdir().unwrap();
    let meta = dir.path().join("metadata.csv");
    std::fs::write(
        &meta,
        "id,sequence,emission_nm,qy,structure_path\n\
         a,MSKGEELFTGVVPILVELDGDVNGHKF,510,0.5,a.pdb\n\
         b,MSKGEELFTGVVPILVELDGDVNGHKF,510,0.6,b.pdb\n\
         c,WWWWWCCCCCHHHHHMMMMMQQQQQ,510,0.2,c.pdb\n",
    )
    .unwrap();
    let out = dir.path().join("split");
    assert_eq!(cli(&["split", "--metadata", s(&meta), "--out", s(&out)]), 0);
    let text = std::fs::read_to_string(out.join("split.csv")).unwrap();
    assert!(text.contains("a,train,,"));
    assert!(text.contains("b,train,,"));
    assert!(text.contains("c,test,0,<50"));
    assert!(out.join("run.json").is_file());
}

#[test]
fn missing_feature_table_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cv");
    let features = dir.path().join("nothing");
    assert_eq!(cli(&["eval-random", "--features", s(&features), "--out", s(&out)]), 1);
    assert!(matches!(
        FeatureTable::load(&features),
        Err(cromech_cli::CliError::MissingFeatureTable(_))
    ));
}

#[test]
fn schema_mismatch_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let fx = write_fixture(dir.path(), 3, 0, 4);
    let out = dir.path().join("features");
    assert_eq!(featurize(&fx, &out), 0);
    let meta_path = out.join("features.meta.json");
    let mut meta = FeatureTableMeta::load(&meta_path).unwrap();
    meta.schema_hash = "0000".into();
    meta.save(&meta_path).unwrap();
    assert!(matches!(
        FeatureTable::load(&out),
        Err(cromech_cli::CliError::ConfigMismatch { .. })
    ));
}

#[test]
fn unknown_condition_and_bucket_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let fx = write_fixture(dir.path(), 12, 0, 5);
    let features = dir.path().join("features");
    assert_eq!(featurize(&fx, &features), 0);
    let out = dir.path().join("x");
    assert_eq!(
        cli(&["eval-random", "--features", s(&features), "--out", s(&out), "--condition", "nope"]),
        1
    );
    assert_eq!(
        cli(&["eval-homology", "--features", s(&features), "--out", s(&out), "--bucket", "10-20"]),
        1
    );
}

#[test]
fn full_pipeline_writes_every_table() {
    let dir = tempfile::tempdir().unwrap();
    let fx = write_fixture(dir.path(), 36, 0, 6);
    let features = dir.path().join("features");
    assert_eq!(featurize(&fx, &features), 0);
    let cfg = s(&fx.config);
    let f = s(&features);
    let p = |name: &str| dir.path().join(name);

    assert_eq!(cli(&["split", "--metadata", s(&fx.metadata), "--config", cfg, "--out", s(&p("split"))]), 0);
    let code = cli(&["eval-random", "--features", f, "--config", cfg, "--out", s(&p("cv"))]);
    assert!(code == 0 || code == 2, "eval-random exit {code}");
    let code = cli(&[
        "eval-homology",
        "--features",
        f,
        "--split",
        s(&p("split")),
        "--config",
        cfg,
        "--out",
        s(&p("hom")),
    ]);
    assert!(code == 0 || code == 2, "eval-homology exit {code}");
    let code = cli(&[
        "ablate",
        "--features",
        f,
        "--config",
        cfg,
        "--seeds",
        "3",
        "--condition",
        "full",
        "--condition",
        "shuffle",
        "--out",
        s(&p("abl")),
    ]);
    assert!(code == 0 || code == 2, "ablate exit {code}");
    let code = cli(&["report", "--random", s(&p("cv")), "--homology", s(&p("hom")), "--out", s(&p("report"))]);
    assert_eq!(code, 0);

    for (d, files) in [
        ("split", &["split.csv", "split.json", "summary.txt", "run.json"][..]),
        ("cv", &["metrics.csv", "oof.csv", "recurrence.csv", "skipped.csv", "summary.txt", "run.json"]),
        ("hom", &["metrics.csv", "predictions.csv", "summary.txt", "run.json"]),
        ("abl", &["ablation.csv", "metrics.csv", "summary.txt", "run.json"]),
        ("report", &["frontier.csv", "frontier_random.svg", "frontier_homology.svg", "recurrence.svg", "run.json"]),
    ] {
        for file in files {
            assert!(p(d).join(file).is_file(), "{d}/{file} missing");
        }
    }

    let ablation = std::fs::read_to_string(p("abl").join("ablation.csv")).unwrap();
    assert_eq!(ablation.lines().count(), 3);
    assert!(ablation.lines().nth(1).unwrap().starts_with("full,"));
    let sidecar = RunSidecar::read(&p("abl")).unwrap();
    assert_eq!(sidecar.config.seeds, vec![3]);
    assert_eq!(sidecar.options["conditions"], "full,shuffle");

    let hom = std::fs::read_to_string(p("hom").join("metrics.csv")).unwrap();
    for line in hom.lines().skip(1) {
        let scope = line.split(',').nth(2).unwrap();
        assert!(["70–85", "50–70", "<50", "all"].contains(&scope), "scope {scope}");
    }
    assert!(p("hom").join("models").read_dir().unwrap().count() >= 1);

    let frontier = std::fs::read_to_string(p("report").join("frontier.csv")).unwrap();
    assert!(frontier.starts_with("source,condition,scope,screen,K,precision_mean,precision_sd"));
    assert!(frontier.contains("random,full,oof,bright,5,"));
}
