//! On-disk fixtures shared by the CLI integration tests and the acceptance harness.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cromech_core::synth::{mutate, random_sequence, synthetic_structure, write_pdb, ChromophoreKind, SynthStructureConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub metadata: PathBuf,
    pub structures: PathBuf,
    pub config: PathBuf,
    pub ids: Vec<String>,
}

pub const EMISSIONS: [f64; 3] = [510.0, 595.0, 640.0];

/// `n` synthetic proteins with chromophore-bearing PDB files, plus `broken` extra rows
/// whose structures have no chromophore. Sequences come in families of four.
pub fn write_fixture(dir: &Path, n: usize, broken: usize, seed: u64) -> Fixture {
    let structures = dir.join("structures");
    std::fs::create_dir_all(&structures).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parents: Vec<String> = (0..n.div_ceil(4).max(1)).map(|_| random_sequence(&mut rng, 90)).collect();
    let mut meta = String::from("id,sequence,emission_nm,qy,structure_path\n");
    let mut ids = Vec::new();
    for i in 0..n + broken {
        let id = format!("fp{i:03}");
        let file = format!("{id}.pdb");
        let kind = if i % 3 == 2 { ChromophoreKind::Triad } else { ChromophoreKind::Native };
        let cfg = SynthStructureConfig {
            kind,
            n_local: 12,
            n_far: 6,
        };
        let mut s = synthetic_structure(&id, &cfg, seed * 1000 + i as u64);
        if i >= n {
            s.residues.retain(|r| r.aa3 != "CRO" && r.aa3 != "TYR");
        }
        std::fs::write(structures.join(&file), write_pdb(&s)).unwrap();
        let rate = match i % 4 {
            0 => 0.0,
            1 => 0.01,
            2 if (i / 4) % 2 == 0 => 0.03,
            2 => 0.05,
            _ => 0.2,
        };
        let seq = mutate(&mut rng, &parents[(i / 4) % parents.len()], rate);
        let qy: f64 = rng.random_range(0.05..0.95);
        let _ = writeln!(meta, "{id},{seq},{},{qy},{file}", EMISSIONS[i % 3]);
        ids.push(id);
    }
    let metadata = dir.join("metadata.csv");
    std::fs::write(&metadata, meta).unwrap();
    let config = dir.join("config.toml");
    std::fs::write(
        &config,
        "seeds = [0, 1]\nfolds = 5\n\n[et]\nn_trees = 15\n\n[stress]\nbootstrap_resamples = 200\n",
    )
    .unwrap();
    Fixture {
        metadata,
        structures,
        config,
        ids,
    }
}

pub fn cli(args: &[&str]) -> i32 {
    let mut full = vec!["cromech"];
    full.extend_from_slice(args);
    cromech_cli::run_from(full)
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Every regular file under `dir`, relative path to bytes, sorted by path.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}
