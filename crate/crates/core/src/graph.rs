//! Chromophore-local typed residue graph.
//!
//! Nodes are the non-chromophore residues whose atom-mean centre lies strictly inside
//! the locality radius around the chromophore centre. Both activated channels share one
//! neighbour set (minimum atom distance below the edge cutoff) and differ only in their
//! weight function.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::chromophore::{CroAnchor, Region};
use crate::error::{Error, Result};
use crate::geom::{min_pair_distance, Point};
use crate::ingest::{Residue, ResidueKey, Structure};

pub const LOCALITY_RADIUS: f64 = 12.0;
pub const EDGE_CUTOFF: f64 = 8.0;
pub const STERIC_DECAY: f64 = 3.0;
pub const ALPHA_DECAY: f64 = 5.0;
pub const BETA_DECAY: f64 = 3.0;

/// Candidate physical edge annotations. Only [`ChannelId::ACTIVATED`] carry edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelId {
    Steric,
    Hydrophobic,
    Spatial,
    Hbond,
    Electrostatic,
    Aromatic,
}

impl ChannelId {
    pub const ACTIVATED: [ChannelId; 2] = [ChannelId::Steric, ChannelId::Hydrophobic];

    pub fn name(self) -> &'static str {
        match self {
            ChannelId::Steric => "steric",
            ChannelId::Hydrophobic => "hydrophobic",
            ChannelId::Spatial => "spatial",
            ChannelId::Hbond => "hbond",
            ChannelId::Electrostatic => "electrostatic",
            ChannelId::Aromatic => "aromatic",
        }
    }

    pub fn is_activated(self) -> bool {
        Self::ACTIVATED.contains(&self)
    }

    /// Contact weight for a minimum atom distance `d`, for activated channels.
    pub fn weight(self, d: f64) -> Option<f64> {
        match self {
            ChannelId::Steric => Some((-d / STERIC_DECAY).exp()),
            ChannelId::Hydrophobic => Some(1.0 / (1.0 + d)),
            _ => None,
        }
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    pub locality_radius: f64,
    pub edge_cutoff: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            locality_radius: LOCALITY_RADIUS,
            edge_cutoff: EDGE_CUTOFF,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    /// Index into `Structure::residues`.
    pub residue: usize,
    pub key: ResidueKey,
    pub aa3: String,
    pub centre: Point,
    /// Chromophore-distance attenuation.
    pub alpha: f64,
    /// Region readout weights, indexed by [`Region::index`].
    pub beta: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEdges {
    pub channel: ChannelId,
    /// Unordered pairs with `u < v`; weights are symmetric.
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MechanismGraph {
    /// Sorted by residue key so node order does not depend on file order.
    pub nodes: Vec<GraphNode>,
    pub channels: Vec<ChannelEdges>,
}

impl MechanismGraph {
    pub fn channel(&self, channel: ChannelId) -> Option<&ChannelEdges> {
        self.channels.iter().find(|c| c.channel == channel)
    }

    /// Per-node neighbour lists `(neighbour, weight)` for one channel.
    pub fn adjacency(&self, channel: ChannelId) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        if let Some(ch) = self.channel(channel) {
            for e in &ch.edges {
                adj[e.u].push((e.v, e.weight));
                adj[e.v].push((e.u, e.weight));
            }
        }
        adj
    }

    /// Write one channel's edges as `u_id,v_id,weight` rows.
    pub fn write_edge_list<W: Write>(&self, channel: ChannelId, mut out: W) -> std::io::Result<()> {
        writeln!(out, "u_id,v_id,weight")?;
        if let Some(ch) = self.channel(channel) {
            for e in &ch.edges {
                writeln!(out, "{},{},{}", self.nodes[e.u].key, self.nodes[e.v].key, e.weight)?;
            }
        }
        Ok(())
    }
}

/// Minimum atom-atom distance between two residues.
pub fn residue_distance(u: &Residue, v: &Residue) -> f64 {
    min_pair_distance(&u.positions(), &v.positions()).expect("residues have atoms")
}

pub fn build_graph(s: &Structure, a: &CroAnchor, cfg: &GraphConfig) -> Result<MechanismGraph> {
    let mut nodes: Vec<GraphNode> = s
        .residues
        .iter()
        .enumerate()
        .filter(|(idx, _)| !a.is_cro_residue(*idx))
        .filter_map(|(idx, r)| {
            let centre = r.centre();
            let dist = (centre - a.cro_centre).norm();
            (dist < cfg.locality_radius).then(|| GraphNode {
                residue: idx,
                key: r.key(),
                aa3: r.aa3.clone(),
                centre,
                alpha: (-dist / ALPHA_DECAY).exp(),
                beta: Region::ALL.map(|reg| (-(centre - a.centre(reg)).norm() / BETA_DECAY).exp()),
            })
        })
        .collect();
    if nodes.is_empty() {
        return Err(Error::EmptyLocalNeighbourhood);
    }
    nodes.sort_by(|x, y| x.key.cmp(&y.key));

    let positions: Vec<Vec<Point>> = nodes.iter().map(|n| s.residues[n.residue].positions()).collect();
    let mut contacts = Vec::new();
    for u in 0..nodes.len() {
        for v in (u + 1)..nodes.len() {
            let d = min_pair_distance(&positions[u], &positions[v]).expect("non-empty");
            if d < cfg.edge_cutoff {
                contacts.push((u, v, d));
            }
        }
    }
    let channels = ChannelId::ACTIVATED
        .into_iter()
        .map(|channel| ChannelEdges {
            channel,
            edges: contacts
                .iter()
                .map(|&(u, v, d)| Edge {
                    u,
                    v,
                    weight: channel.weight(d).expect("activated channel"),
                })
                .collect(),
        })
        .collect();
    Ok(MechanismGraph { nodes, channels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chromophore::MaturationState;
    use crate::ingest::{AtomRecord, StructureSource};

    fn res(seq: i32, aa3: &str, pts: &[[f64; 3]]) -> Residue {
        Residue {
            chain_id: "A".into(),
            seq_index: seq,
            insertion_code: None,
            aa3: aa3.into(),
            atoms: pts
                .iter()
                .enumerate()
                .map(|(i, p)| AtomRecord {
                    atom_name: format!("C{i}"),
                    element: "C".into(),
                    position: Point::new(p[0], p[1], p[2]),
                })
                .collect(),
            is_hetero: false,
        }
    }

    fn point_anchor(cro_residue: usize) -> CroAnchor {
        let o = Point::zeros();
        CroAnchor {
            cro_residues: vec![cro_residue],
            maturation_state: MaturationState::NativeCro,
            region_atoms: [vec![o], vec![o], vec![o]],
            region_centres: [o, o, o],
            cro_centre: o,
            missing_regions: vec![],
        }
    }

    #[test]
    fn residue_distance_cases() {
        let u = res(1, "ALA", &[[0.0, 0.0, 0.0], [5.0, 0.0, 0.0]]);
        let v = res(2, "ALA", &[[3.0, 0.0, 0.0]]);
        assert_eq!(residue_distance(&u, &u), 0.0);
        assert_eq!(residue_distance(&u, &v), 2.0);
        assert_eq!(residue_distance(&v, &u), 2.0);
    }

    #[test]
    fn channel_weights() {
        assert_eq!(ChannelId::Steric.weight(0.0), Some(1.0));
        assert_eq!(ChannelId::Hydrophobic.weight(0.0), Some(1.0));
        let e = (-1.0f64).exp();
        assert!((ChannelId::Steric.weight(3.0).unwrap() - e).abs() < 1e-15);
        assert_eq!(ChannelId::Hydrophobic.weight(3.0), Some(0.25));
        assert_eq!(ChannelId::Hbond.weight(1.0), None);
        assert!(!ChannelId::Electrostatic.is_activated());
    }

    #[test]
    fn locality_is_strict() {
        let s = Structure {
            id: "t".into(),
            residues: vec![
                res(1, "CRO", &[[0.0, 0.0, 0.0]]),
                res(2, "ALA", &[[12.0, 0.0, 0.0]]),
                res(3, "ALA", &[[11.999, 0.0, 0.0]]),
            ],
            source: StructureSource::Predicted,
        };
        let g = build_graph(&s, &point_anchor(0), &GraphConfig::default()).unwrap();
        assert_eq!(g.nodes.len(), 1);
        assert_eq!(g.nodes[0].key.seq_index, 3);
    }

    #[test]
    fn edges_weights_and_attenuation() {
        let s = Structure {
            id: "t".into(),
            residues: vec![
                res(1, "CRO", &[[0.0, 0.0, 0.0]]),
                res(2, "ALA", &[[4.0, 0.0, 0.0]]),
                res(3, "LEU", &[[7.0, 0.0, 0.0]]),
                res(4, "VAL", &[[-6.0, 0.0, 0.0]]),
            ],
            source: StructureSource::Predicted,
        };
        let g = build_graph(&s, &point_anchor(0), &GraphConfig::default()).unwrap();
        assert_eq!(g.nodes.len(), 3);
        let steric = g.channel(ChannelId::Steric).unwrap();
        // pairs: (2,3) d=3, (2,4) d=10 (cut), (3,4) d=13 (cut)
        assert_eq!(steric.edges.len(), 1);
        assert!((steric.edges[0].weight - (-1.0f64).exp()).abs() < 1e-15);
        let hyd = g.channel(ChannelId::Hydrophobic).unwrap();
        assert_eq!(hyd.edges[0].weight, 0.25);
        assert!((g.nodes[0].alpha - (-4.0f64 / 5.0).exp()).abs() < 1e-15);
        assert!((g.nodes[1].beta[0] - (-7.0f64 / 3.0).exp()).abs() < 1e-15);
        let mut buf = Vec::new();
        g.write_edge_list(ChannelId::Hydrophobic, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "u_id,v_id,weight\nA:2,A:3,0.25\n");
    }

    #[test]
    fn empty_neighbourhood_errors() {
        let s = Structure {
            id: "t".into(),
            residues: vec![res(1, "CRO", &[[0.0; 3]]), res(2, "ALA", &[[30.0, 0.0, 0.0]])],
            source: StructureSource::Predicted,
        };
        assert!(matches!(
            build_graph(&s, &point_anchor(0), &GraphConfig::default()),
            Err(Error::EmptyLocalNeighbourhood)
        ));
    }
}
