//! Effective per-command settings, loadable from a TOML file with one table
//! per subcommand and overridable from the command line.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use wbr_core::envs::PggConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct MetricsSettings {
    /// Panel CSV; takes precedence over `synth`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub panel: Option<PathBuf>,
    /// Generator used when no panel is given.
    pub synth: String,
    pub subjects: usize,
    pub rounds: u32,
    pub seed: u64,
    pub endowment: u32,
    pub priors: Vec<String>,
    pub metrics: Vec<String>,
    pub include_kl: bool,
    pub kl_star_epsilon: f64,
    pub ot: String,
    /// `pooled` or `subject:<id>`.
    pub scope: String,
    pub changes: bool,
    pub svg: bool,
    pub out: PathBuf,
    pub format: Format,
}

impl Default for MetricsSettings {
    fn default() -> Self {
        Self {
            panel: None,
            synth: "stickyDrift".into(),
            subjects: 16,
            rounds: 20,
            seed: 0,
            endowment: 40,
            priors: vec!["uniform".into(), "previousPolicy".into(), "optimalDirac".into()],
            metrics: vec!["entropy".into(), "klStar".into(), "wasserstein".into()],
            include_kl: true,
            kl_star_epsilon: wbr_core::info::DEFAULT_KL_STAR_EPSILON,
            ot: "abs:1".into(),
            scope: "pooled".into(),
            changes: false,
            svg: false,
            out: default_out(),
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepSettings {
    pub cost: String,
    pub lambdas: Vec<f64>,
    pub prior: String,
    pub schedule: String,
    pub seeds: Vec<u64>,
    pub episodes: usize,
    pub out: PathBuf,
    pub format: Format,
    pub game: PggConfig,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            cost: "wasserstein".into(),
            lambdas: vec![0.0, 0.5, 2.0, 1e6],
            prior: "dirac:20".into(),
            schedule: "fixed".into(),
            seeds: vec![0],
            episodes: 1,
            out: default_out(),
            format: Format::Csv,
            game: PggConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct SimulateSettings {
    pub cost: String,
    pub lambda: f64,
    pub prior: String,
    pub schedule: String,
    /// `selfplay`, or a prior every opponent samples from.
    pub opponents: String,
    pub episodes: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    pub game: PggConfig,
}

impl Default for SimulateSettings {
    fn default() -> Self {
        Self {
            cost: "wasserstein:abs:2".into(),
            lambda: 0.1,
            prior: "dirac:20".into(),
            schedule: "previous".into(),
            opponents: "selfplay".into(),
            episodes: 1,
            seed: 0,
            out: default_out(),
            format: Format::Csv,
            game: PggConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct BestResponseSettings {
    pub utilities: Vec<f64>,
    /// Whitespace- or comma-separated numbers; replaces `utilities`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub utilities_file: Option<PathBuf>,
    /// Defaults to uniform over the utility vector.
    pub prior: String,
    pub cost: String,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for BestResponseSettings {
    fn default() -> Self {
        Self {
            utilities: Vec::new(),
            utilities_file: None,
            prior: "uniform".into(),
            cost: "wasserstein".into(),
            lambda: 1.0,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct SynthSettings {
    pub generator: String,
    pub subjects: usize,
    pub rounds: u32,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self {
            generator: "stickyDrift".into(),
            subjects: 16,
            rounds: 20,
            seed: 0,
            out: default_out(),
            format: Format::Csv,
        }
    }
}

/// Whole config file; every table is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bestresponse: Option<BestResponseSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSettings>,
}
