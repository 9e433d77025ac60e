//! Experiment configuration: command-line flags merged over an optional
//! JSON config file (same keys as the flags), merged over profile
//! defaults.

use popsize::estimate::{ProtocolParams, Variant};
use serde::Deserialize;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum VariantArg {
    As,
    Af,
}

impl VariantArg {
    pub fn to_variant(self) -> Variant {
        match self {
            VariantArg::As => Variant::As,
            VariantArg::Af => Variant::Af,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ProfileArg {
    /// Constants sized so the analysis guarantees apply.
    Faithful,
    /// Short epochs (cte=16) for exploratory runs; weakened guarantees.
    Fast,
}

/// Flags shared by the simulation-style subcommands. Every field is
/// optional here; defaults are resolved after the config file is merged in.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunFlags {
    /// Base RNG seed; trial i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trials per population size.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Protocol variant: randomized A/S or synthetic-coin A/F.
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// Epoch-length coefficient; overrides the profile default.
    #[arg(long)]
    pub cte: Option<u32>,
    /// Epochs to run per unit of clk (the protocol's 5).
    #[arg(long = "epoch-mult")]
    pub epoch_mult: Option<u32>,
    /// Constant profile fixing cte defaults.
    #[arg(long, value_enum)]
    pub profile: Option<ProfileArg>,
    /// Worker threads for concurrent trials (never within a trial).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long = "out-csv")]
    pub out_csv: Option<PathBuf>,
    #[arg(long = "out-json")]
    pub out_json: Option<PathBuf>,
    #[arg(long = "out-svg")]
    pub out_svg: Option<PathBuf>,
    /// Interaction budget per trial; default 1e4 * n * ceil(log2 n)^2.
    #[arg(long = "max-budget")]
    pub max_budget: Option<u64>,
    /// Snapshot cadence in interactions; default n (once per parallel time
    /// unit).
    #[arg(long = "snapshot-every")]
    pub snapshot_every: Option<u64>,
    /// JSON config file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// The config-file mirror of the flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub n_list: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub variant: Option<String>,
    pub cte: Option<u32>,
    pub epoch_mult: Option<u32>,
    pub profile: Option<String>,
    pub jobs: Option<usize>,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
    pub max_budget: Option<u64>,
    pub snapshot_every: Option<u64>,
}

pub fn load_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub ns: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub params: ProtocolParams,
    pub profile: ProfileArg,
    pub jobs: usize,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
    pub max_budget: Option<u64>,
    pub snapshot_every: Option<u64>,
}

fn parse_variant(s: &str) -> Result<VariantArg, CliError> {
    match s {
        "as" => Ok(VariantArg::As),
        "af" => Ok(VariantArg::Af),
        other => Err(CliError::Usage(format!(
            "unknown variant {other:?} in config (expected \"as\" or \"af\")"
        ))),
    }
}

fn parse_profile(s: &str) -> Result<ProfileArg, CliError> {
    match s {
        "faithful" => Ok(ProfileArg::Faithful),
        "fast" => Ok(ProfileArg::Fast),
        other => Err(CliError::Usage(format!(
            "unknown profile {other:?} in config (expected \"faithful\" or \"fast\")"
        ))),
    }
}

/// Merges flags over the optional config file and resolves defaults:
/// variant as, faithful profile, 10 trials, seed 1. The profile fixes cte
/// unless --cte is given explicitly.
pub fn resolve(
    n_flag: Option<usize>,
    n_list_flag: Option<Vec<usize>>,
    flags: &RunFlags,
) -> Result<ExperimentConfig, CliError> {
    let file = match &flags.config {
        Some(path) => load_file_config(path)?,
        None => FileConfig::default(),
    };
    let variant = match (&flags.variant, &file.variant) {
        (Some(v), _) => *v,
        (None, Some(s)) => parse_variant(s)?,
        (None, None) => VariantArg::As,
    };
    let profile = match (&flags.profile, &file.profile) {
        (Some(p), _) => *p,
        (None, Some(s)) => parse_profile(s)?,
        (None, None) => ProfileArg::Faithful,
    };
    let mut params = match profile {
        ProfileArg::Faithful => ProtocolParams::faithful(variant.to_variant()),
        ProfileArg::Fast => ProtocolParams::fast(variant.to_variant()),
    };
    if let Some(cte) = flags.cte.or(file.cte) {
        if cte == 0 {
            return Err(CliError::Usage("cte must be >= 1".into()));
        }
        params.cte = cte;
    }
    if let Some(mult) = flags.epoch_mult.or(file.epoch_mult) {
        if mult == 0 {
            return Err(CliError::Usage("epoch-mult must be >= 1".into()));
        }
        params.epoch_multiplier = mult;
    }

    let mut ns: Vec<usize> = match (n_list_flag, n_flag) {
        (Some(list), _) => list,
        (None, Some(n)) => vec![n],
        (None, None) => match (&file.n_list, file.n) {
            (Some(list), _) => list.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => {
                return Err(CliError::Usage("population size required: --n or --n-list".into()))
            }
        },
    };
    ns.sort_unstable();
    ns.dedup();
    if ns.is_empty() {
        return Err(CliError::Usage("population size list is empty".into()));
    }
    if let Some(&bad) = ns.iter().find(|&&n| n < 2) {
        return Err(CliError::Usage(format!("population size must be >= 2, got {bad}")));
    }
    let trials = flags.trials.or(file.trials).unwrap_or(10);
    if trials == 0 {
        return Err(CliError::Usage("trials must be >= 1".into()));
    }
    let jobs = flags.jobs.or(file.jobs).unwrap_or_else(|| {
        std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
    });
    if jobs == 0 {
        return Err(CliError::Usage("jobs must be >= 1".into()));
    }

    Ok(ExperimentConfig {
        ns,
        trials,
        seed: flags.seed.or(file.seed).unwrap_or(1),
        params,
        profile,
        jobs,
        out_csv: flags.out_csv.clone().or(file.out_csv),
        out_json: flags.out_json.clone().or(file.out_json),
        out_svg: flags.out_svg.clone().or(file.out_svg),
        max_budget: flags.max_budget.or(file.max_budget),
        snapshot_every: flags.snapshot_every.or(file.snapshot_every),
    })
}
