//! Chromophore-centred mechanism-graph features for fluorescent-protein quantum-yield
//! prediction.
//!
//! The pipeline runs structure parsing ([`ingest`]), chromophore registration and
//! regional decomposition ([`chromophore`]), chromophore-local graph construction
//! ([`graph`]), seed-signal propagation and readout ([`propagate`]) and band-specific
//! ExtraTrees regression ([`model`]). [`evaluate`] holds the random-CV and
//! homology-controlled evaluation harness, ablations and the clamp stress test.

pub mod chromophore;
pub mod config;
pub mod dataset;
pub mod error;
pub mod evaluate;
pub mod geom;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod propagate;
pub mod signals;
pub mod stats;
pub mod synth;

pub use chromophore::{
    anchor_chromophore, clamp_descriptors, decompose_regions, register_chromophore,
    ChromophoreConfig, ClampDescriptors, CroAnchor, MaturationState, Region,
};
pub use config::RunConfig;
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use graph::{build_graph, residue_distance, ChannelId, GraphConfig, MechanismGraph};
pub use ingest::{load_metadata, parse_structure, ProteinRecord, Residue, Structure};
pub use model::{assign_band, Band, BandModel, EtRegressorConfig, ModelSet};
pub use propagate::{featurize, featurize_structure, FeatureConfig, FeatureVector};
pub use signals::{family_mapping, FeatureSchema, SeedTable};
pub use evaluate::{AblationCondition, MetricsReport, SplitPlan};
