//! Command-line front end for the cromech pipeline.
//!
//! Every command reads its inputs from files, writes its tables into `--out`, and drops a
//! `run.json` sidecar next to them holding the resolved configuration and input hashes.

pub mod commands;
pub mod error;
pub mod output;
pub mod plot;
pub mod sidecar;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use cromech_core::RunConfig;

pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "cromech", version, about = "Chromophore mechanism-graph features for quantum-yield prediction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse structures and write the 121-column candidate feature table.
    Featurize(FeaturizeArgs),
    /// Build the homology-controlled train/test split from metadata sequences.
    Split(SplitArgs),
    /// Seed-repeated, quantile-stratified cross-validation.
    EvalRandom(EvalRandomArgs),
    /// Train on the homology split's train set and score test buckets.
    EvalHomology(EvalHomologyArgs),
    /// Run the ablation conditions under shared fold plans.
    Ablate(AblateArgs),
    /// Clamp stress test with corrupted enrichment features.
    Stress(StressArgs),
    /// Render P@K frontiers and feature recurrence from earlier outputs.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// TOML run configuration; command-line flags take precedence over its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated seed list, e.g. `0,1,2`.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
}

impl CommonArgs {
    /// Load the configuration file (or defaults) and apply flag overrides.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seeds) = &self.seeds {
            cfg.seeds = seeds.clone();
        }
        cfg.paths.out = Some(self.out.clone());
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct FeaturizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Metadata CSV with id, sequence, emission_nm, qy, structure_path.
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    /// Directory that relative structure paths are resolved against.
    #[arg(long)]
    pub structures: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub metadata: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalRandomArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Directory written by `featurize`.
    #[arg(long)]
    pub features: PathBuf,
    /// Condition key to evaluate.
    #[arg(long, default_value = "full")]
    pub condition: String,
}

#[derive(Debug, Clone, Args)]
pub struct EvalHomologyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub features: PathBuf,
    /// Directory written by `split`; computed from the feature table when omitted.
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, default_value = "full")]
    pub condition: String,
    /// Restrict reported rows to one bucket (`70-85`, `50-70` or `<50`).
    #[arg(long)]
    pub bucket: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub features: PathBuf,
    /// Condition keys to run (repeatable); all nine when omitted.
    #[arg(long)]
    pub condition: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct StressArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub features: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Directory written by `eval-random` or `ablate`.
    #[arg(long)]
    pub random: Option<PathBuf>,
    /// Directory written by `eval-homology`.
    #[arg(long)]
    pub homology: Option<PathBuf>,
}

/// How a command finished when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Some rows or cells were skipped.
    Partial,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Partial => 2,
        }
    }

    pub(crate) fn from_skips(n: usize) -> Self {
        if n == 0 {
            Outcome::Success
        } else {
            Outcome::Partial
        }
    }
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Featurize(a) => commands::featurize::run(&a),
        Command::Split(a) => commands::split::run(&a),
        Command::EvalRandom(a) => commands::evaluate::eval_random(&a),
        Command::EvalHomology(a) => commands::evaluate::eval_homology(&a),
        Command::Ablate(a) => commands::evaluate::ablate(&a),
        Command::Stress(a) => commands::evaluate::stress(&a),
        Command::Report(a) => commands::report::run(&a),
    }
}

/// Parse `args` (including the program name) and run; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            1
        }
    }
}
