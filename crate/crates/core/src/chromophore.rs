//! Mature-chromophore registration, regional decomposition and clamp descriptors.
//!
//! A deposited mature chromophore (hetero residue such as `CRO`) is used directly. When
//! none exists, e.g. in predicted models, the X-Tyr-Gly precursor triad is located and
//! registered as the anchor instead; the regions are then mapped onto the precursor atoms
//! that become the phenolate, methine bridge and imidazolinone ring on maturation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{centroid, min_pair_distance, Point};
use crate::ingest::Structure;

/// Chromophore hetero codes recognised by default.
pub const DEFAULT_HETERO_CODES: [&str; 5] = ["CRO", "CR2", "CR8", "CRQ", "CSY"];

/// Radius for counting clamp contacts around a region centre (Å).
pub const CLAMP_CONTACT_RADIUS: f64 = 6.0;
/// Exponential decay length of clamp contacts (Å).
pub const CLAMP_DECAY: f64 = 3.0;
/// Reported minimum distance when no non-chromophore residue exists.
pub const MINDIST_SENTINEL: f64 = 999.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Phenolate,
    Bridge,
    Imidazolinone,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Phenolate, Region::Bridge, Region::Imidazolinone];

    pub fn name(self) -> &'static str {
        match self {
            Region::Phenolate => "phenolate",
            Region::Bridge => "bridge",
            Region::Imidazolinone => "imidazolinone",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaturationState {
    NativeCro,
    RegisteredTriad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChromophoreConfig {
    pub hetero_codes: Vec<String>,
}

impl Default for ChromophoreConfig {
    fn default() -> Self {
        Self {
            hetero_codes: DEFAULT_HETERO_CODES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Residues that make up the registered chromophore, before decomposition.
///
/// For a native chromophore `residues` holds the single hetero residue; for a registered
/// triad it holds the X, Tyr and Gly residue indices in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChromophoreSite {
    pub residues: Vec<usize>,
    pub state: MaturationState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CroAnchor {
    /// Indices into `Structure::residues`; these are never graph nodes.
    pub cro_residues: Vec<usize>,
    pub maturation_state: MaturationState,
    /// Per-region support points, pairwise disjoint by construction.
    pub region_atoms: [Vec<Point>; 3],
    pub region_centres: [Point; 3],
    pub cro_centre: Point,
    /// Regions whose required atoms were incomplete.
    pub missing_regions: Vec<Region>,
}

impl CroAnchor {
    pub fn centre(&self, region: Region) -> Point {
        self.region_centres[region.index()]
    }

    pub fn is_cro_residue(&self, index: usize) -> bool {
        self.cro_residues.contains(&index)
    }
}

const BACKBONE: [&str; 5] = ["N", "CA", "C", "O", "OXT"];

/// Locate the chromophore: a recognised hetero residue wins over any precursor triad.
pub fn register_chromophore(s: &Structure, cfg: &ChromophoreConfig) -> Result<ChromophoreSite> {
    // Residues are visited in (chain, sequence number, insertion code) order so the
    // result does not depend on the order records appear in the file.
    let mut order: Vec<usize> = (0..s.residues.len()).collect();
    order.sort_by_key(|&i| s.residues[i].key());

    if let Some(idx) = order
        .iter()
        .copied()
        .find(|&i| cfg.hetero_codes.iter().any(|c| c == &s.residues[i].aa3))
    {
        return Ok(ChromophoreSite {
            residues: vec![idx],
            state: MaturationState::NativeCro,
        });
    }

    let all_atoms = s.residues.iter().flat_map(|r| r.atoms.iter().map(|a| &a.position));
    let structure_centre = centroid(all_atoms).ok_or(Error::EmptyStructure)?;

    let mut best: Option<(f64, [usize; 3])> = None;
    for w in order.windows(3) {
        let (prev, tyr, gly) = (&s.residues[w[0]], &s.residues[w[1]], &s.residues[w[2]]);
        if tyr.aa3 != "TYR" || gly.aa3 != "GLY" {
            continue;
        }
        if prev.chain_id != tyr.chain_id || gly.chain_id != tyr.chain_id {
            continue;
        }
        let side_chain = centroid(
            tyr.atoms
                .iter()
                .filter(|a| !BACKBONE.contains(&a.atom_name.as_str()))
                .map(|a| &a.position),
        )
        .unwrap_or_else(|| tyr.centre());
        let dist = (side_chain - structure_centre).norm();
        if best.is_none_or(|(d, _)| dist < d) {
            best = Some((dist, [w[0], w[1], w[2]]));
        }
    }
    let (_, triad) = best.ok_or(Error::NoChromophore)?;
    Ok(ChromophoreSite {
        residues: triad.to_vec(),
        state: MaturationState::RegisteredTriad,
    })
}

/// (role, atom name) lists per region. Roles index into `ChromophoreSite::residues`.
fn region_atoms_for(state: MaturationState) -> [(usize, Vec<(usize, &'static str)>); 3] {
    match state {
        MaturationState::NativeCro => [
            (
                0,
                ["CG2", "CD1", "CD2", "CE1", "CE2", "CZ", "OH"]
                    .map(|n| (0, n))
                    .to_vec(),
            ),
            (0, vec![(0, "CB2"), (0, "CA2")]),
            (0, ["C1", "N2", "CA2", "C2", "N3"].map(|n| (0, n)).to_vec()),
        ],
        MaturationState::RegisteredTriad => [
            (
                1,
                ["CG", "CD1", "CD2", "CE1", "CE2", "CZ", "OH"]
                    .map(|n| (1, n))
                    .to_vec(),
            ),
            (1, vec![(1, "CA"), (1, "CB")]),
            (2, vec![(0, "C"), (0, "O"), (2, "N"), (2, "CA"), (2, "C")]),
        ],
    }
}

/// Split the chromophore into phenolate, bridge and imidazolinone support points.
///
/// Atoms are claimed in region order, so an atom listed for two regions (the native
/// `CA2`) belongs to the earlier one. A region with no atoms present falls back to the
/// centroid of its parent residue and is flagged in `missing_regions`.
pub fn decompose_regions(s: &Structure, site: &ChromophoreSite) -> CroAnchor {
    let template = region_atoms_for(site.state);
    let mut claimed: Vec<(usize, &str)> = Vec::new();
    let mut region_atoms: [Vec<Point>; 3] = Default::default();
    let mut missing_regions = Vec::new();

    for (region, (fallback_role, atoms)) in Region::ALL.into_iter().zip(template.iter()) {
        let mut points = Vec::new();
        let mut complete = true;
        for &(role, name) in atoms {
            let res_idx = site.residues[role];
            if claimed.contains(&(res_idx, name)) {
                continue;
            }
            match s.residues[res_idx].atom(name) {
                Some(atom) => {
                    claimed.push((res_idx, name));
                    points.push(atom.position);
                }
                None => complete = false,
            }
        }
        if !complete {
            missing_regions.push(region);
        }
        if points.is_empty() {
            points.push(s.residues[site.residues[*fallback_role]].centre());
        }
        region_atoms[region.index()] = points;
    }

    let region_centres = region_atoms
        .each_ref()
        .map(|pts| centroid(pts.iter()).expect("region has support points"));
    let cro_centre = centroid(region_atoms.iter().flatten()).expect("non-empty");
    CroAnchor {
        cro_residues: site.residues.clone(),
        maturation_state: site.state,
        region_atoms,
        region_centres,
        cro_centre,
        missing_regions,
    }
}

/// Register and decompose in one step.
pub fn anchor_chromophore(s: &Structure, cfg: &ChromophoreConfig) -> Result<CroAnchor> {
    let site = register_chromophore(s, cfg)?;
    Ok(decompose_regions(s, &site))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampDescriptors {
    pub values: [f64; 7],
}

impl ClampDescriptors {
    pub const NAMES: [&'static str; 7] = [
        "clamp_phenolate_contact",
        "clamp_bridge_contact",
        "clamp_imidazolinone_contact",
        "clamp_phenolate_mindist",
        "clamp_bridge_mindist",
        "clamp_imidazolinone_mindist",
        "clamp_asymmetry",
    ];

    pub fn contact(&self, region: Region) -> f64 {
        self.values[region.index()]
    }

    pub fn mindist(&self, region: Region) -> f64 {
        self.values[3 + region.index()]
    }

    pub fn asymmetry(&self) -> f64 {
        self.values[6]
    }
}

/// Seven local clamp descriptors computed from non-chromophore residues.
///
/// Per region: an exponentially decaying count of residue centres within
/// [`CLAMP_CONTACT_RADIUS`] of the region centre and the minimum atom distance to the
/// region; plus the phenolate minus imidazolinone contact asymmetry.
pub fn clamp_descriptors(s: &Structure, a: &CroAnchor) -> ClampDescriptors {
    let mut contact = [0.0f64; 3];
    let mut mindist = [MINDIST_SENTINEL; 3];
    for (idx, residue) in s.residues.iter().enumerate() {
        if a.is_cro_residue(idx) {
            continue;
        }
        let centre = residue.centre();
        let positions = residue.positions();
        for region in Region::ALL {
            let r = region.index();
            let d = (centre - a.region_centres[r]).norm();
            if d < CLAMP_CONTACT_RADIUS {
                contact[r] += (-d / CLAMP_DECAY).exp();
            }
            if let Some(m) = min_pair_distance(&positions, &a.region_atoms[r]) {
                mindist[r] = mindist[r].min(m);
            }
        }
    }
    let asymmetry = contact[0] - contact[2];
    ClampDescriptors {
        values: [
            contact[0], contact[1], contact[2], mindist[0], mindist[1], mindist[2], asymmetry,
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{AtomRecord, Residue, StructureSource};

    fn residue(chain: &str, seq: i32, aa3: &str, atoms: &[(&str, [f64; 3])]) -> Residue {
        Residue {
            chain_id: chain.into(),
            seq_index: seq,
            insertion_code: None,
            aa3: aa3.into(),
            atoms: atoms
                .iter()
                .map(|(n, p)| AtomRecord {
                    atom_name: n.to_string(),
                    element: n[..1].to_string(),
                    position: Point::new(p[0], p[1], p[2]),
                })
                .collect(),
            is_hetero: false,
        }
    }

    fn structure(residues: Vec<Residue>) -> Structure {
        Structure {
            id: "t".into(),
            residues,
            source: StructureSource::Predicted,
        }
    }

    fn tyr_at(seq: i32, offset: [f64; 3]) -> Residue {
        let ring = [
            ("N", [0.0, 0.0, 0.0]),
            ("CA", [1.0, 0.0, 0.0]),
            ("C", [1.5, 1.0, 0.0]),
            ("O", [1.5, 2.0, 0.0]),
            ("CB", [1.5, -1.0, 0.0]),
            ("CG", [2.5, -1.5, 0.0]),
            ("CD1", [3.5, -1.0, 0.0]),
            ("CD2", [2.5, -2.5, 0.0]),
            ("CE1", [4.5, -1.5, 0.0]),
            ("CE2", [3.5, -3.0, 0.0]),
            ("CZ", [4.5, -2.5, 0.0]),
            ("OH", [5.5, -3.0, 0.0]),
        ];
        let shifted: Vec<_> = ring
            .iter()
            .map(|(n, p)| (*n, [p[0] + offset[0], p[1] + offset[1], p[2] + offset[2]]))
            .collect();
        residue("A", seq, "TYR", &shifted)
    }

    fn bb(chain: &str, seq: i32, aa3: &str, origin: [f64; 3]) -> Residue {
        let o = origin;
        residue(
            chain,
            seq,
            aa3,
            &[
                ("N", [o[0], o[1], o[2]]),
                ("CA", [o[0] + 1.0, o[1], o[2]]),
                ("C", [o[0] + 1.5, o[1] + 1.0, o[2]]),
                ("O", [o[0] + 1.5, o[1] + 2.0, o[2]]),
            ],
        )
    }

    #[test]
    fn native_chromophore_detected_directly() {
        let mut cro = bb("A", 66, "CRO", [0.0, 0.0, 0.0]);
        cro.is_hetero = true;
        let s = structure(vec![
            bb("A", 64, "SER", [-5.0, 0.0, 0.0]),
            bb("A", 65, "TYR", [-3.0, 0.0, 0.0]),
            cro,
        ]);
        let site = register_chromophore(&s, &ChromophoreConfig::default()).unwrap();
        assert_eq!(site.state, MaturationState::NativeCro);
        assert_eq!(site.residues, vec![2]);
    }

    #[test]
    fn native_wins_over_triads_elsewhere() {
        let mut cro = bb("B", 66, "CRO", [20.0, 0.0, 0.0]);
        cro.is_hetero = true;
        let s = structure(vec![
            bb("A", 1, "SER", [0.0, 0.0, 0.0]),
            tyr_at(2, [3.0, 0.0, 0.0]),
            bb("A", 3, "GLY", [6.0, 0.0, 0.0]),
            cro,
        ]);
        let site = register_chromophore(&s, &ChromophoreConfig::default()).unwrap();
        assert_eq!(site.state, MaturationState::NativeCro);
        assert_eq!(site.residues, vec![3]);
    }

    #[test]
    fn triad_nearest_structure_centroid_selected() {
        // Two S-Y-G triads. Filler residues pull the structure centroid near the second.
        let mut residues = vec![
            bb("A", 1, "SER", [-30.0, 0.0, 0.0]),
            tyr_at(2, [-27.0, 0.0, 0.0]),
            bb("A", 3, "GLY", [-24.0, 0.0, 0.0]),
            bb("A", 4, "SER", [0.0, 0.0, 0.0]),
            tyr_at(5, [3.0, 0.0, 0.0]),
            bb("A", 6, "GLY", [6.0, 0.0, 0.0]),
        ];
        for k in 0..6 {
            residues.push(bb("A", 10 + k, "ALA", [8.0 + k as f64, 5.0, 0.0]));
        }
        let s = structure(residues);
        let site = register_chromophore(&s, &ChromophoreConfig::default()).unwrap();
        assert_eq!(site.state, MaturationState::RegisteredTriad);
        assert_eq!(site.residues, vec![3, 4, 5]);
    }

    #[test]
    fn triads_do_not_span_chains() {
        let mut gly = bb("B", 3, "GLY", [6.0, 0.0, 0.0]);
        gly.chain_id = "B".into();
        let s = structure(vec![bb("A", 1, "SER", [0.0; 3]), tyr_at(2, [3.0, 0.0, 0.0]), gly]);
        assert!(matches!(
            register_chromophore(&s, &ChromophoreConfig::default()),
            Err(Error::NoChromophore)
        ));
    }

    #[test]
    fn poly_alanine_has_no_chromophore() {
        let s = structure((0..10).map(|k| bb("A", k, "ALA", [3.8 * k as f64, 0.0, 0.0])).collect());
        assert!(matches!(
            register_chromophore(&s, &ChromophoreConfig::default()),
            Err(Error::NoChromophore)
        ));
    }

    #[test]
    fn phenolate_centre_is_ring_centroid() {
        let s = structure(vec![
            bb("A", 1, "SER", [-3.0, 0.0, 0.0]),
            tyr_at(2, [0.0, 0.0, 0.0]),
            bb("A", 3, "GLY", [3.0, 3.0, 0.0]),
        ]);
        let anchor = anchor_chromophore(&s, &ChromophoreConfig::default()).unwrap();
        // CG,CD1,CD2,CE1,CE2,CZ,OH x = (2.5+3.5+2.5+4.5+3.5+4.5+5.5)/7, y = (-1.5-1-2.5-1.5-3-2.5-3)/7
        let expect = Point::new(26.5 / 7.0, -15.0 / 7.0, 0.0);
        assert!((anchor.centre(Region::Phenolate) - expect).norm() < 1e-9);
        assert!(anchor.missing_regions.is_empty());
        // bridge = Tyr CA, CB
        assert!((anchor.centre(Region::Bridge) - Point::new(1.25, -0.5, 0.0)).norm() < 1e-12);
        let all: Vec<Point> = anchor.region_atoms.iter().flatten().copied().collect();
        let mean = centroid(all.iter()).unwrap();
        assert!((anchor.cro_centre - mean).norm() < 1e-12);
    }

    #[test]
    fn missing_region_atoms_fall_back_and_flag() {
        let mut tyr = tyr_at(2, [0.0; 3]);
        tyr.atoms.retain(|a| BACKBONE.contains(&a.atom_name.as_str()) || a.atom_name == "CB");
        let s = structure(vec![bb("A", 1, "SER", [-3.0, 0.0, 0.0]), tyr, bb("A", 3, "GLY", [3.0, 3.0, 0.0])]);
        let anchor = anchor_chromophore(&s, &ChromophoreConfig::default()).unwrap();
        assert_eq!(anchor.missing_regions, vec![Region::Phenolate]);
        let tyr_centre = s.residues[1].centre();
        assert!((anchor.centre(Region::Phenolate) - tyr_centre).norm() < 1e-12);
    }

    #[test]
    fn empty_neighbourhood_clamps() {
        let s = structure(vec![
            bb("A", 1, "SER", [-3.0, 0.0, 0.0]),
            tyr_at(2, [0.0; 3]),
            bb("A", 3, "GLY", [3.0, 3.0, 0.0]),
        ]);
        let anchor = anchor_chromophore(&s, &ChromophoreConfig::default()).unwrap();
        let clamps = clamp_descriptors(&s, &anchor);
        assert_eq!(&clamps.values[..3], &[0.0, 0.0, 0.0]);
        assert_eq!(clamps.asymmetry(), 0.0);
        assert_eq!(clamps.mindist(Region::Bridge), MINDIST_SENTINEL);
    }

    #[test]
    fn single_contact_at_three_angstrom() {
        let s = structure(vec![
            bb("A", 1, "SER", [-3.0, 0.0, 0.0]),
            tyr_at(2, [0.0; 3]),
            bb("A", 3, "GLY", [3.0, 3.0, 0.0]),
        ]);
        let anchor = anchor_chromophore(&s, &ChromophoreConfig::default()).unwrap();
        let pc = anchor.centre(Region::Phenolate);
        // Probe 3 Å from the phenolate centre, on the far side from the other regions.
        let dir = (pc - anchor.centre(Region::Imidazolinone)).normalize();
        let probe = pc + dir * 3.0;
        let mut s2 = s.clone();
        s2.residues.push(residue("A", 50, "LEU", &[("CA", [probe.x, probe.y, probe.z])]));
        let clamps = clamp_descriptors(&s2, &anchor);
        let e = (-1.0f64).exp();
        assert!((clamps.contact(Region::Phenolate) - e).abs() < 1e-12);
        assert!((clamps.contact(Region::Phenolate) - 0.367879).abs() < 1e-6);
        assert_eq!(clamps.contact(Region::Imidazolinone), 0.0);
        assert!((clamps.asymmetry() - e).abs() < 1e-12);
        assert!(clamps.mindist(Region::Phenolate) > 0.0);
    }
}
