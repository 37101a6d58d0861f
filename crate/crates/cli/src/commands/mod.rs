pub mod evaluate;
pub mod featurize;
pub mod report;
pub mod split;

use cromech_core::{Error, SeedTable};

use crate::error::Result;
use cromech_core::RunConfig;

pub(crate) fn seed_table(cfg: &RunConfig) -> Result<SeedTable> {
    Ok(match &cfg.paths.seed_table {
        Some(path) => SeedTable::from_path(path)?,
        None => SeedTable::bundled(),
    })
}

/// Stable short code for a per-protein failure.
pub(crate) fn reason_code(e: &Error) -> &'static str {
    match e {
        Error::Io { .. } => "io",
        Error::MalformedRecord { .. } => "malformed_record",
        Error::EmptyStructure => "empty_structure",
        Error::NoChromophore => "no_chromophore",
        Error::EmptyLocalNeighbourhood => "empty_neighbourhood",
        Error::SequenceTooShort { .. } => "sequence_too_short",
        Error::ExcludedBand(_) => "excluded_band",
        _ => "error",
    }
}
