//! Structure and metadata ingestion.
//!
//! PDB text is read with the fixed-column layout of the v3.3 format. Only the first model
//! is kept, alternate locations collapse to the highest-occupancy copy of each atom, and
//! waters are dropped. Hetero groups are retained since mature chromophores are deposited
//! as `HETATM` records.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{centroid, Point};

/// Residue names treated as solvent and removed during parsing.
pub const WATER_CODES: [&str; 3] = ["HOH", "WAT", "DOD"];

#[derive(Debug, Clone, PartialEq)]
pub struct AtomRecord {
    pub atom_name: String,
    pub element: String,
    pub position: Point,
}

/// Residue identity within a structure: chain, author sequence number and insertion code.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ResidueKey {
    pub chain_id: String,
    pub seq_index: i32,
    pub insertion_code: Option<char>,
}

impl fmt::Display for ResidueKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.chain_id, self.seq_index)?;
        if let Some(code) = self.insertion_code {
            write!(f, "{code}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residue {
    pub chain_id: String,
    pub seq_index: i32,
    /// Appended to `seq_index` when forming the residue identity.
    pub insertion_code: Option<char>,
    pub aa3: String,
    pub atoms: Vec<AtomRecord>,
    pub is_hetero: bool,
}

impl Residue {
    pub fn key(&self) -> ResidueKey {
        ResidueKey {
            chain_id: self.chain_id.clone(),
            seq_index: self.seq_index,
            insertion_code: self.insertion_code,
        }
    }

    pub fn atom(&self, name: &str) -> Option<&AtomRecord> {
        self.atoms.iter().find(|a| a.atom_name == name)
    }

    pub fn positions(&self) -> Vec<Point> {
        self.atoms.iter().map(|a| a.position).collect()
    }

    /// Atom-mean residue centre.
    pub fn centre(&self) -> Point {
        centroid(self.atoms.iter().map(|a| &a.position)).expect("residue has at least one atom")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureSource {
    Experimental,
    Predicted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    pub id: String,
    pub residues: Vec<Residue>,
    pub source: StructureSource,
}

impl Structure {
    pub fn atom_count(&self) -> usize {
        self.residues.iter().map(|r| r.atoms.len()).sum()
    }
}

/// Bookkeeping produced alongside a parsed structure.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    /// Residue groups seen in the first model, including waters.
    pub total_groups: usize,
    pub dropped_waters: usize,
    /// Groups sharing (chain, resSeq, iCode) with an earlier group under a different
    /// residue name (microheterogeneity); the first-encountered group is kept.
    pub dropped_microheterogeneity: usize,
}

/// Parse a PDB file. The structure id is the file stem.
pub fn parse_structure(path: impl AsRef<Path>) -> Result<Structure> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_pdb_str(&id, &text).map(|(s, _)| s)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct GroupKey {
    chain_id: String,
    seq_index: i32,
    insertion_code: Option<char>,
    aa3: String,
}

struct GroupBuf {
    key: GroupKey,
    is_hetero: bool,
    atoms: Vec<(f64, AtomRecord)>,
}

/// Parse PDB-format text.
pub fn parse_pdb_str(id: &str, text: &str) -> Result<(Structure, ParseReport)> {
    let mut source = StructureSource::Predicted;
    let mut groups: Vec<GroupBuf> = Vec::new();
    let mut index: HashMap<GroupKey, usize> = HashMap::new();

    for (lineno, line) in text.lines().enumerate() {
        let record = line.get(0..6).unwrap_or(line).trim_end();
        match record {
            "EXPDTA" => {
                let method = line.get(10..).unwrap_or("").to_ascii_uppercase();
                if !method.contains("THEORETICAL") && !method.contains("PREDICTED") {
                    source = StructureSource::Experimental;
                }
            }
            "ENDMDL" | "END" => break,
            "ATOM" | "HETATM" => {
                let parsed = parse_atom_line(line, lineno + 1)?;
                let slot = *index.entry(parsed.key.clone()).or_insert_with(|| {
                    groups.push(GroupBuf {
                        key: parsed.key.clone(),
                        is_hetero: false,
                        atoms: Vec::new(),
                    });
                    groups.len() - 1
                });
                let group = &mut groups[slot];
                group.is_hetero |= record == "HETATM";
                match group
                    .atoms
                    .iter_mut()
                    .find(|(_, a)| a.atom_name == parsed.atom.atom_name)
                {
                    Some(existing) if parsed.occupancy > existing.0 => {
                        *existing = (parsed.occupancy, parsed.atom);
                    }
                    Some(_) => {}
                    None => group.atoms.push((parsed.occupancy, parsed.atom)),
                }
            }
            _ => {}
        }
    }

    let mut report = ParseReport {
        total_groups: groups.len(),
        ..ParseReport::default()
    };
    let mut seen: HashMap<(String, i32, Option<char>), ()> = HashMap::new();
    let mut residues = Vec::with_capacity(groups.len());
    for group in groups {
        if WATER_CODES.contains(&group.key.aa3.as_str()) {
            report.dropped_waters += 1;
            continue;
        }
        let ident = (
            group.key.chain_id.clone(),
            group.key.seq_index,
            group.key.insertion_code,
        );
        if seen.insert(ident, ()).is_some() {
            report.dropped_microheterogeneity += 1;
            continue;
        }
        residues.push(Residue {
            chain_id: group.key.chain_id,
            seq_index: group.key.seq_index,
            insertion_code: group.key.insertion_code,
            aa3: group.key.aa3,
            atoms: group.atoms.into_iter().map(|(_, a)| a).collect(),
            is_hetero: group.is_hetero,
        });
    }

    if residues.is_empty() {
        return Err(Error::EmptyStructure);
    }
    Ok((
        Structure {
            id: id.to_string(),
            residues,
            source,
        },
        report,
    ))
}

struct ParsedAtom {
    key: GroupKey,
    occupancy: f64,
    atom: AtomRecord,
}

fn column(line: &str, start: usize, end: usize) -> &str {
    let end = end.min(line.len());
    if start >= end {
        return "";
    }
    line.get(start..end).unwrap_or("").trim()
}

fn parse_coord(line: &str, start: usize, end: usize, axis: char, lineno: usize) -> Result<f64> {
    let raw = column(line, start, end);
    let value: f64 = raw.parse().map_err(|_| Error::MalformedRecord {
        line: lineno,
        reason: format!("unparseable {axis} coordinate `{raw}`"),
    })?;
    if !value.is_finite() {
        return Err(Error::MalformedRecord {
            line: lineno,
            reason: format!("non-finite {axis} coordinate"),
        });
    }
    Ok(value)
}

fn parse_atom_line(line: &str, lineno: usize) -> Result<ParsedAtom> {
    if !line.is_ascii() {
        return Err(Error::MalformedRecord {
            line: lineno,
            reason: "non-ASCII characters in coordinate record".into(),
        });
    }
    let atom_name = column(line, 12, 16).to_string();
    if atom_name.is_empty() {
        return Err(Error::MalformedRecord {
            line: lineno,
            reason: "empty atom name".into(),
        });
    }
    let aa3 = column(line, 17, 20).to_ascii_uppercase();
    let chain_id = column(line, 21, 22).to_string();
    let seq_raw = column(line, 22, 26);
    let seq_index: i32 = seq_raw.parse().map_err(|_| Error::MalformedRecord {
        line: lineno,
        reason: format!("unparseable residue number `{seq_raw}`"),
    })?;
    let insertion_code = column(line, 26, 27).chars().next();
    let x = parse_coord(line, 30, 38, 'x', lineno)?;
    let y = parse_coord(line, 38, 46, 'y', lineno)?;
    let z = parse_coord(line, 46, 54, 'z', lineno)?;
    let occupancy = match column(line, 54, 60) {
        "" => 1.0,
        raw => raw.parse().map_err(|_| Error::MalformedRecord {
            line: lineno,
            reason: format!("unparseable occupancy `{raw}`"),
        })?,
    };
    let element = match column(line, 76, 78) {
        "" => infer_element(&atom_name),
        e => e.to_ascii_uppercase(),
    };
    Ok(ParsedAtom {
        key: GroupKey {
            chain_id,
            seq_index,
            insertion_code,
            aa3,
        },
        occupancy,
        atom: AtomRecord {
            atom_name,
            element,
            position: Point::new(x, y, z),
        },
    })
}

fn infer_element(atom_name: &str) -> String {
    atom_name
        .chars()
        .find(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_uppercase().to_string())
        .unwrap_or_default()
}

/// One row of the dataset metadata table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProteinRecord {
    pub id: String,
    pub sequence: String,
    pub emission_nm: f64,
    pub qy: f64,
    pub structure_path: String,
}

pub const METADATA_COLUMNS: [&str; 5] = ["id", "sequence", "emission_nm", "qy", "structure_path"];

/// Load and validate the comma-delimited metadata table. Row order is preserved.
pub fn load_metadata(path: impl AsRef<Path>) -> Result<Vec<ProteinRecord>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_metadata(file)
}

pub fn read_metadata<R: std::io::Read>(reader: R) -> Result<Vec<ProteinRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Metadata(e.to_string()))?
        .clone();
    for col in METADATA_COLUMNS {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::MissingColumn(col.to_string()));
        }
    }
    let mut out = Vec::new();
    for (row, rec) in rdr.deserialize::<ProteinRecord>().enumerate() {
        let mut rec = rec.map_err(|e| Error::Metadata(e.to_string()))?;
        rec.sequence = rec.sequence.to_ascii_uppercase();
        validate_record(row + 1, &rec)?;
        out.push(rec);
    }
    Ok(out)
}

fn validate_record(row: usize, rec: &ProteinRecord) -> Result<()> {
    if !(0.0..=1.0).contains(&rec.qy) {
        return Err(Error::InvalidQy {
            row,
            id: rec.id.clone(),
            qy: rec.qy,
        });
    }
    if !(rec.emission_nm > 0.0 && rec.emission_nm.is_finite()) {
        return Err(Error::InvalidEmission {
            row,
            id: rec.id.clone(),
            emission_nm: rec.emission_nm,
        });
    }
    let len = rec.sequence.chars().count();
    if len < 5 {
        return Err(Error::SequenceTooShort {
            id: rec.id.clone(),
            len,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[allow(clippy::too_many_arguments)]
    fn atom_line(record: &str, serial: u32, name: &str, alt: char, res: &str, chain: &str, seq: i32, xyz: [f64; 3], occ: f64) -> String {
        format!(
            "{record:<6}{serial:>5} {name:<4}{alt}{res:>3} {chain}{seq:>4}    {:>8.3}{:>8.3}{:>8.3}{occ:>6.2}{:>6.2}          {:>2}",
            xyz[0], xyz[1], xyz[2], 20.0, &name[..1]
        )
    }

    #[test]
    fn single_residue_three_atoms() {
        let text = [
            atom_line("ATOM", 1, "N", ' ', "GLY", "A", 1, [0.0, 0.0, 0.0], 1.0),
            atom_line("ATOM", 2, "CA", ' ', "GLY", "A", 1, [1.4, 0.0, 0.0], 1.0),
            atom_line("ATOM", 3, "C", ' ', "GLY", "A", 1, [2.0, 1.2, 0.0], 1.0),
        ]
        .join("\n");
        let (s, report) = parse_pdb_str("t", &text).unwrap();
        assert_eq!(s.residues.len(), 1);
        assert_eq!(s.residues[0].atoms.len(), 3);
        assert_eq!(s.residues[0].aa3, "GLY");
        assert!(!s.residues[0].is_hetero);
        assert_eq!(report.total_groups, 1);
        assert_eq!(s.residues[0].atoms[1].position, Point::new(1.4, 0.0, 0.0));
    }

    #[test]
    fn hetatm_chromophore_is_hetero() {
        let text = [
            atom_line("ATOM", 1, "CA", ' ', "SER", "A", 65, [0.0, 0.0, 0.0], 1.0),
            atom_line("HETATM", 2, "CA2", ' ', "CRO", "A", 66, [3.0, 0.0, 0.0], 1.0),
        ]
        .join("\n");
        let (s, _) = parse_pdb_str("t", &text).unwrap();
        let cro = &s.residues[1];
        assert_eq!(cro.aa3, "CRO");
        assert!(cro.is_hetero);
    }

    #[test]
    fn only_first_model_is_kept() {
        let mut lines = vec!["MODEL        1".to_string()];
        lines.push(atom_line("ATOM", 1, "CA", ' ', "ALA", "A", 1, [0.0; 3], 1.0));
        lines.push(atom_line("ATOM", 2, "CA", ' ', "ALA", "A", 2, [3.8, 0.0, 0.0], 1.0));
        lines.push("ENDMDL".into());
        lines.push("MODEL        2".into());
        lines.push(atom_line("ATOM", 1, "CA", ' ', "ALA", "A", 1, [0.0; 3], 1.0));
        lines.push(atom_line("ATOM", 2, "CA", ' ', "ALA", "A", 2, [3.8, 0.0, 0.0], 1.0));
        lines.push(atom_line("ATOM", 3, "CA", ' ', "ALA", "A", 3, [7.6, 0.0, 0.0], 1.0));
        lines.push("ENDMDL".into());
        let (s, _) = parse_pdb_str("t", &lines.join("\n")).unwrap();
        assert_eq!(s.residues.len(), 2);
    }

    #[test]
    fn altloc_keeps_highest_occupancy_then_first() {
        let text = [
            atom_line("ATOM", 1, "CA", 'A', "SER", "A", 1, [0.0; 3], 0.4),
            atom_line("ATOM", 2, "CA", 'B', "SER", "A", 1, [1.0, 0.0, 0.0], 0.6),
            atom_line("ATOM", 3, "CB", 'A', "SER", "A", 1, [2.0, 0.0, 0.0], 0.5),
            atom_line("ATOM", 4, "CB", 'B', "SER", "A", 1, [3.0, 0.0, 0.0], 0.5),
        ]
        .join("\n");
        let (s, _) = parse_pdb_str("t", &text).unwrap();
        let r = &s.residues[0];
        assert_eq!(r.atoms.len(), 2);
        assert_eq!(r.atom("CA").unwrap().position.x, 1.0);
        assert_eq!(r.atom("CB").unwrap().position.x, 2.0);
    }

    #[test]
    fn waters_are_dropped_and_counted() {
        let text = [
            atom_line("ATOM", 1, "CA", ' ', "ALA", "A", 1, [0.0; 3], 1.0),
            atom_line("HETATM", 2, "O", ' ', "HOH", "A", 201, [5.0, 0.0, 0.0], 1.0),
            atom_line("HETATM", 3, "O", ' ', "HOH", "A", 202, [9.0, 0.0, 0.0], 1.0),
        ]
        .join("\n");
        let (s, report) = parse_pdb_str("t", &text).unwrap();
        assert_eq!(report.dropped_waters, 2);
        assert_eq!(report.dropped_waters + s.residues.len(), report.total_groups);
    }

    #[test]
    fn insertion_codes_are_distinct_residues() {
        let text = [
            atom_line("ATOM", 1, "CA", ' ', "ALA", "A", 52, [0.0; 3], 1.0),
            {
                let mut l = atom_line("ATOM", 2, "CA", ' ', "GLY", "A", 52, [3.8, 0.0, 0.0], 1.0);
                l.replace_range(26..27, "A");
                l
            },
        ]
        .join("\n");
        let (s, _) = parse_pdb_str("t", &text).unwrap();
        assert_eq!(s.residues.len(), 2);
        assert_eq!(s.residues[1].insertion_code, Some('A'));
        assert_eq!(s.residues[1].key().to_string(), "A:52A");
    }

    #[test]
    fn malformed_coordinates_error() {
        let mut line = atom_line("ATOM", 1, "CA", ' ', "ALA", "A", 1, [0.0; 3], 1.0);
        line.replace_range(30..38, "  abc.de");
        let err = parse_pdb_str("t", &line).unwrap_err();
        assert!(matches!(err, Error::MalformedRecord { line: 1, .. }));
    }

    #[test]
    fn empty_structure_errors() {
        let text = atom_line("HETATM", 1, "O", ' ', "HOH", "A", 1, [0.0; 3], 1.0);
        assert!(matches!(parse_pdb_str("t", &text), Err(Error::EmptyStructure)));
        assert!(matches!(parse_pdb_str("t", "REMARK nothing"), Err(Error::EmptyStructure)));
    }

    #[test]
    fn short_lines_without_occupancy_or_element() {
        let line = "ATOM      1  CA  ALA A   1       1.000   2.000   3.000";
        let (s, _) = parse_pdb_str("t", line).unwrap();
        assert_eq!(s.residues[0].atoms[0].element, "C");
    }

    #[test]
    fn expdta_marks_experimental() {
        let text = format!(
            "EXPDTA    X-RAY DIFFRACTION\n{}",
            atom_line("ATOM", 1, "CA", ' ', "ALA", "A", 1, [0.0; 3], 1.0)
        );
        let (s, _) = parse_pdb_str("t", &text).unwrap();
        assert_eq!(s.source, StructureSource::Experimental);
    }

    #[test]
    fn metadata_accepts_well_formed_rows() {
        let seq = "M".repeat(230);
        let csv = format!("id,sequence,emission_nm,qy,structure_path\na,{seq},509,0.60,a.pdb\n");
        let recs = read_metadata(csv.as_bytes()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].emission_nm, 509.0);
        assert_eq!(recs[0].qy, 0.60);
    }

    #[test]
    fn metadata_rejects_invalid_qy() {
        let csv = "id,sequence,emission_nm,qy,structure_path\na,MSKGEE,509,1.3,a.pdb\n";
        assert!(matches!(read_metadata(csv.as_bytes()), Err(Error::InvalidQy { .. })));
    }

    #[test]
    fn metadata_rejects_short_sequence() {
        let csv = "id,sequence,emission_nm,qy,structure_path\na,MSKG,509,0.5,a.pdb\n";
        assert!(matches!(
            read_metadata(csv.as_bytes()),
            Err(Error::SequenceTooShort { len: 4, .. })
        ));
    }

    #[test]
    fn metadata_requires_columns() {
        let csv = "id,sequence,qy,structure_path\na,MSKGEE,0.5,a.pdb\n";
        match read_metadata(csv.as_bytes()) {
            Err(Error::MissingColumn(c)) => assert_eq!(c, "emission_nm"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn metadata_preserves_row_order() {
        let csv = "id,sequence,emission_nm,qy,structure_path\nz,MSKGEE,509,0.5,z.pdb\na,MSKGEE,600,0.1,a.pdb\n";
        let ids: Vec<_> = read_metadata(csv.as_bytes())
            .unwrap()
            .into_iter()
            .map(|r| r.id)
            .collect();
        assert_eq!(ids, ["z", "a"]);
    }
}
