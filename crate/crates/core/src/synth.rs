//! Synthetic structures and datasets for tests, benchmarks and demos.
//!
//! Structures place a chromophore near the origin and scatter residues around it; the
//! planted-signal dataset draws features directly and builds QY from three known
//! non-identity columns.

use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;
use crate::geom::Point;
use crate::ingest::{AtomRecord, Residue, Structure, StructureSource};
use crate::signals::{family_mapping, STANDARD_RESIDUES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChromophoreKind {
    /// A single `CRO` hetero residue.
    Native,
    /// An unmatured Thr-Tyr-Gly triad.
    Triad,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthStructureConfig {
    pub kind: ChromophoreKind,
    /// Residues whose centre lies inside the locality radius.
    pub n_local: usize,
    /// Residues placed between 14 and 20 Å from the chromophore.
    pub n_far: usize,
}

impl Default for SynthStructureConfig {
    fn default() -> Self {
        Self {
            kind: ChromophoreKind::Native,
            n_local: 15,
            n_far: 10,
        }
    }
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn p(x: f64, y: f64, z: f64) -> Point {
    Point::new(round3(x), round3(y), round3(z))
}

fn atom(name: &str, pos: Point) -> AtomRecord {
    AtomRecord {
        atom_name: name.into(),
        element: name[..1].into(),
        position: pos,
    }
}

fn residue(seq: i32, aa3: &str, atoms: Vec<AtomRecord>, is_hetero: bool) -> Residue {
    Residue {
        chain_id: "A".into(),
        seq_index: seq,
        insertion_code: None,
        aa3: aa3.into(),
        atoms,
        is_hetero,
    }
}

/// Planar hexagon of radius 1.4 Å centred at `c` in the xy-plane.
fn ring(c: Point) -> Vec<Point> {
    (0..6)
        .map(|k| {
            let t = std::f64::consts::PI / 3.0 * k as f64;
            p(c.x + 1.4 * t.cos(), c.y + 1.4 * t.sin(), c.z)
        })
        .collect()
}

fn native_cro(seq: i32) -> Vec<Residue> {
    let r = ring(Point::new(-3.6, 0.0, 0.0));
    let mut atoms: Vec<AtomRecord> = ["CG2", "CD1", "CE1", "CZ", "CE2", "CD2"]
        .iter()
        .zip(&r)
        .map(|(n, pos)| atom(n, *pos))
        .collect();
    atoms.push(atom("OH", p(-6.4, 0.0, 0.0)));
    atoms.push(atom("CB2", p(-1.5, 0.9, 0.0)));
    atoms.push(atom("CA2", p(0.0, 0.6, 0.0)));
    for (name, (x, y)) in ["C1", "N2", "C2", "N3"].iter().zip([(0.8, 1.8), (1.2, -0.6), (2.1, 1.3), (2.4, 0.0)]) {
        atoms.push(atom(name, p(x, y, 0.0)));
    }
    atoms.push(atom("O2", p(2.8, 2.3, 0.0)));
    vec![residue(seq, "CRO", atoms, true)]
}

fn triad(seq: i32) -> Vec<Residue> {
    let x = residue(
        seq - 1,
        "THR",
        vec![
            atom("N", p(1.0, 3.5, 0.4)),
            atom("CA", p(1.5, 2.4, 0.9)),
            atom("C", p(1.9, 1.4, -0.2)),
            atom("O", p(2.9, 1.6, -0.9)),
            atom("CB", p(2.6, 2.9, 1.9)),
        ],
        false,
    );
    let r = ring(Point::new(-3.6, 0.0, 0.0));
    let mut tyr_atoms = vec![
        atom("N", p(1.1, 0.3, -0.3)),
        atom("CA", p(0.0, 0.6, 0.0)),
        atom("C", p(-0.3, 2.0, 0.6)),
        atom("O", p(-1.0, 2.8, 0.0)),
        atom("CB", p(-1.5, 0.9, 0.0)),
    ];
    for (n, pos) in ["CG", "CD1", "CE1", "CZ", "CE2", "CD2"].iter().zip(&r) {
        tyr_atoms.push(atom(n, *pos));
    }
    tyr_atoms.push(atom("OH", p(-6.4, 0.0, 0.0)));
    let gly = residue(
        seq + 1,
        "GLY",
        vec![
            atom("N", p(2.4, 0.0, 0.0)),
            atom("CA", p(3.3, -1.1, 0.2)),
            atom("C", p(4.6, -0.8, -0.4)),
            atom("O", p(5.0, 0.3, -0.7)),
        ],
        false,
    );
    vec![x, residue(seq, "TYR", tyr_atoms, false), gly]
}

fn random_unit(rng: &mut ChaCha8Rng) -> Point {
    loop {
        let v = Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Backbone plus a few side-chain atoms scattered within 1.8 Å of `centre`. The atom
/// centroid sits close to, not exactly on, `centre`.
fn random_residue(rng: &mut ChaCha8Rng, seq: i32, aa3: &str, centre: Point) -> Residue {
    let mut names = vec!["N", "CA", "C", "O"];
    let extra = ["CB", "CG", "CD", "CE", "NZ", "OG"];
    let n_side = if aa3 == "GLY" { 0 } else { rng.random_range(1..=extra.len()) };
    names.extend(&extra[..n_side]);
    let atoms = names
        .into_iter()
        .map(|n| {
            let off = random_unit(rng) * rng.random_range(0.5..1.8);
            let pos = centre + off;
            atom(n, p(pos.x, pos.y, pos.z))
        })
        .collect();
    residue(seq, aa3, atoms, false)
}

/// A random structure with a chromophore near the origin. Local residue centres are
/// drawn in a 4.5-11 Å shell, far residues in a 14-20 Å shell.
pub fn synthetic_structure(id: &str, cfg: &SynthStructureConfig, seed: u64) -> Structure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cro_seq = 66;
    let chromophore = match cfg.kind {
        ChromophoreKind::Native => native_cro(cro_seq),
        ChromophoreKind::Triad => triad(cro_seq),
    };
    // Tyr is avoided in triad structures so the planted triad is the only candidate.
    let alphabet: Vec<&str> = STANDARD_RESIDUES
        .iter()
        .copied()
        .filter(|a| cfg.kind == ChromophoreKind::Native || *a != "TYR")
        .collect();
    let mut others = Vec::new();
    for k in 0..cfg.n_local + cfg.n_far {
        let (lo, hi) = if k < cfg.n_local { (4.5, 11.0) } else { (14.0, 20.0) };
        let centre = random_unit(&mut rng) * rng.random_range(lo..hi);
        let aa3 = *alphabet.choose(&mut rng).expect("non-empty alphabet");
        others.push((aa3, centre));
    }
    let mut residues = Vec::new();
    let split = others.len() / 2;
    let mut seq = 1;
    for (aa3, c) in &others[..split] {
        residues.push(random_residue(&mut rng, seq, aa3, *c));
        seq += 1;
    }
    seq = cro_seq + 2;
    residues.extend(chromophore);
    for (aa3, c) in &others[split..] {
        residues.push(random_residue(&mut rng, seq, aa3, *c));
        seq += 1;
    }
    Structure {
        id: id.into(),
        residues,
        source: StructureSource::Predicted,
    }
}

/// Render a structure as fixed-column PDB text.
pub fn write_pdb(s: &Structure) -> String {
    let mut out = String::new();
    if s.source == StructureSource::Experimental {
        out.push_str("EXPDTA    X-RAY DIFFRACTION\n");
    }
    let mut serial = 1;
    for r in &s.residues {
        let record = if r.is_hetero { "HETATM" } else { "ATOM  " };
        for a in &r.atoms {
            let name = if a.atom_name.len() < 4 {
                format!(" {:<3}", a.atom_name)
            } else {
                a.atom_name.clone()
            };
            let _ = writeln!(
                out,
                "{record}{serial:>5} {name} {aa3:>3} {chain:1}{seq:>4}{icode:1}   {x:>8.3}{y:>8.3}{z:>8.3}{occ:>6.2}{b:>6.2}          {el:>2}",
                aa3 = r.aa3,
                chain = r.chain_id,
                seq = r.seq_index,
                icode = r.insertion_code.unwrap_or(' '),
                x = a.position.x,
                y = a.position.y,
                z = a.position.z,
                occ = 1.0,
                b = 20.0,
                el = a.element,
            );
            serial += 1;
        }
    }
    out.push_str("END\n");
    out
}

const AMINO_ACIDS: &[u8] = b"ACDEFGHIKLMNPQRSTVWY";

pub fn random_sequence(rng: &mut impl Rng, len: usize) -> String {
    (0..len).map(|_| AMINO_ACIDS[rng.random_range(0..AMINO_ACIDS.len())] as char).collect()
}

/// Substitute each position with probability `rate` by a different residue.
pub fn mutate(rng: &mut impl Rng, seq: &str, rate: f64) -> String {
    seq.bytes()
        .map(|b| {
            if rng.random::<f64>() < rate {
                loop {
                    let c = AMINO_ACIDS[rng.random_range(0..AMINO_ACIDS.len())];
                    if c != b {
                        return c as char;
                    }
                }
            } else {
                b as char
            }
        })
        .collect()
}

/// Non-identity columns carrying the planted signal.
pub const PLANTED_COLUMNS: [&str; 3] = [
    "ch_steric__charge__bridge",
    "ch_hydrophobic__aromatic__imidazolinone",
    "clamp_asymmetry",
];

/// `n` rows of standard-normal features with
/// `qy = clip(0.5 + 0.1 * (s + e), 0, 1)`, where `s` is the scaled sum of the three
/// planted columns (variance 2) and `e` is unit-variance noise. Emission maxima mix the
/// three modelled bands. Sequences come in tight families (which land in the homology
/// training set) plus looser relatives that populate all three test buckets.
pub fn planted_dataset(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ds = Dataset::empty();
    let width = ds.columns.len();
    let schema = family_mapping();
    let planted: Vec<usize> = PLANTED_COLUMNS
        .iter()
        .map(|c| schema.candidate_index(c).expect("planted column exists"))
        .collect();

    let n_family = n * 3 / 5;
    let parents: Vec<String> = (0..n_family.div_ceil(3).max(1)).map(|_| random_sequence(&mut rng, 120)).collect();
    let relative_rates = [0.025, 0.055, 0.15];

    for i in 0..n {
        let x: Vec<f64> = (0..width).map(|_| rng.sample(StandardNormal)).collect();
        let s = (2.0f64 / 3.0).sqrt() * planted.iter().map(|&j| x[j]).sum::<f64>();
        let e: f64 = rng.sample(StandardNormal);
        let qy = (0.5 + 0.1 * (s + e)).clamp(0.0, 1.0);
        let emission = match rng.random_range(0..10) {
            0..=3 => rng.random_range(500.0..560.0),
            4..=6 => rng.random_range(580.0..610.0),
            _ => rng.random_range(610.0..680.0),
        };
        let sequence = if i < n_family {
            mutate(&mut rng, &parents[i / 3], 0.005)
        } else {
            let k = i - n_family;
            let parent = &parents[k % parents.len()];
            mutate(&mut rng, parent, relative_rates[k % relative_rates.len()])
        };
        ds.push(format!("syn{i:03}"), sequence, round3(emission), qy, x);
    }
    ds
}
