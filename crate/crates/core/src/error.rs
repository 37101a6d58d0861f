use std::path::PathBuf;

use thiserror::Error;

use crate::model::Band;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("structure contains no residues after filtering")]
    EmptyStructure,

    #[error("metadata is missing required column `{0}`")]
    MissingColumn(String),

    #[error("row {row} ({id}): quantum yield {qy} outside [0, 1]")]
    InvalidQy { row: usize, id: String, qy: f64 },

    #[error("row {row} ({id}): emission maximum {emission_nm} nm is not positive")]
    InvalidEmission {
        row: usize,
        id: String,
        emission_nm: f64,
    },

    #[error("sequence `{id}` has length {len}; at least 5 residues are required")]
    SequenceTooShort { id: String, len: usize },

    #[error("metadata parse error: {0}")]
    Metadata(String),

    #[error("no chromophore found: no hetero chromophore residue and no X-Tyr-Gly triad")]
    NoChromophore,

    #[error("no residue lies within the chromophore-local neighbourhood")]
    EmptyLocalNeighbourhood,

    #[error("seed table error: {0}")]
    SeedTable(String),

    #[error("band {band} has {rows} training rows; at least 3 are required")]
    InsufficientBandData { band: Band, rows: usize },

    #[error("no fitted model for band {0}")]
    NoModelForBand(Band),

    #[error("emission maximum {0} nm falls outside every modelling band")]
    ExcludedBand(f64),

    #[error("at least {needed} samples are required, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("target has zero variance")]
    DegenerateTarget,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("unknown feature column `{0}`")]
    UnknownColumn(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
