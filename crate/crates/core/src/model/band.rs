use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Emission-band class used to route proteins to a band-specific model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Band {
    #[serde(rename = "GFP_like")]
    GfpLike,
    Red,
    FarRed,
    Excluded,
}

impl Band {
    pub const MODELLED: [Band; 3] = [Band::GfpLike, Band::Red, Band::FarRed];

    pub fn name(self) -> &'static str {
        match self {
            Band::GfpLike => "GFP_like",
            Band::Red => "Red",
            Band::FarRed => "FarRed",
            Band::Excluded => "Excluded",
        }
    }

    pub fn is_modelled(self) -> bool {
        self != Band::Excluded
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Band::GfpLike, Band::Red, Band::FarRed, Band::Excluded]
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown band `{s}`"))
    }
}

/// GFP-like: [500, 560) nm, Red: [580, 610) nm, Far-red: >= 610 nm.
pub fn assign_band(emission_nm: f64) -> Band {
    if (500.0..560.0).contains(&emission_nm) {
        Band::GfpLike
    } else if (580.0..610.0).contains(&emission_nm) {
        Band::Red
    } else if emission_nm >= 610.0 {
        Band::FarRed
    } else {
        Band::Excluded
    }
}
