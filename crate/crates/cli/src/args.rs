use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::settings::{
    BestResponseSettings, Format, MetricsSettings, SimulateSettings, SweepSettings, SynthSettings,
};
use wbr_core::envs::PggConfig;

#[derive(Debug, Parser)]
#[command(name = "wbr", version, about = "Bounded-rational decision experiments with Wasserstein information costs")]
pub struct Cli {
    /// TOML file with one table per subcommand; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Metric-vs-prior table for a contribution panel.
    Metrics(MetricsArgs),
    /// Self-play over a lambda grid.
    Sweep(SweepArgs),
    /// One-step penalized best response, printed as JSON.
    Bestresponse(BestResponseArgs),
    /// Repeated public goods game with bounded-rational agents.
    Simulate(SimulateArgs),
    /// Synthetic contribution panel.
    Synth(SynthArgs),
}

#[derive(Debug, Args, Default)]
pub struct GameArgs {
    /// Tokens each player holds per round.
    #[arg(long)]
    pub endowment: Option<u32>,
    /// Factor applied to the public pot.
    #[arg(long)]
    pub multiplier: Option<f64>,
    /// Players per group.
    #[arg(long)]
    pub group_size: Option<usize>,
    /// Rounds per episode.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Contribution step; actions are multiples of it.
    #[arg(long)]
    pub granularity: Option<u32>,
}

impl GameArgs {
    fn apply(&self, game: &mut PggConfig) {
        set(&mut game.endowment, self.endowment);
        set(&mut game.multiplier, self.multiplier);
        set(&mut game.group_size, self.group_size);
        set(&mut game.rounds, self.rounds);
        set(&mut game.granularity, self.granularity);
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_vec<T>(slot: &mut Vec<T>, value: Vec<T>) {
    if !value.is_empty() {
        *slot = value;
    }
}

#[derive(Debug, Args, Default)]
pub struct MetricsArgs {
    /// Panel CSV with columns subject,group,round,contribution.
    #[arg(long)]
    pub panel: Option<PathBuf>,
    /// Generator name used instead of a panel file.
    #[arg(long)]
    pub synth: Option<String>,
    /// Subjects in the synthetic panel.
    #[arg(long)]
    pub subjects: Option<usize>,
    /// Rounds in the synthetic panel.
    #[arg(long)]
    pub rounds: Option<u32>,
    /// Seed for the synthetic panel.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest allowed contribution.
    #[arg(long)]
    pub endowment: Option<u32>,
    /// Comma-separated priors: uniform, previousPolicy, optimalDirac.
    #[arg(long, value_delimiter = ',')]
    pub priors: Vec<String>,
    /// Comma-separated metrics: entropy, klStar, wasserstein.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<String>,
    /// Leave raw KL out of the report.
    #[arg(long)]
    pub no_kl: bool,
    /// Smoothing floor applied to the prior for KL*.
    #[arg(long)]
    pub kl_star_epsilon: Option<f64>,
    /// Ground distance for the Wasserstein metric, e.g. `abs:2`.
    #[arg(long)]
    pub ot: Option<String>,
    /// `pooled` or `subject:<id>`.
    #[arg(long)]
    pub scope: Option<String>,
    /// Also write round-to-round change statistics.
    #[arg(long)]
    pub changes: bool,
    /// Also write SVG charts.
    #[arg(long)]
    pub svg: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl MetricsArgs {
    pub fn apply(&self, s: &mut MetricsSettings) {
        if self.panel.is_some() {
            s.panel = self.panel.clone();
        }
        if let Some(g) = &self.synth {
            s.synth = g.clone();
            if self.panel.is_none() {
                s.panel = None;
            }
        }
        set(&mut s.subjects, self.subjects);
        set(&mut s.rounds, self.rounds);
        set(&mut s.seed, self.seed);
        set(&mut s.endowment, self.endowment);
        set_vec(&mut s.priors, self.priors.clone());
        set_vec(&mut s.metrics, self.metrics.clone());
        if self.no_kl {
            s.include_kl = false;
        }
        set(&mut s.kl_star_epsilon, self.kl_star_epsilon);
        set(&mut s.ot, self.ot.clone());
        set(&mut s.scope, self.scope.clone());
        s.changes |= self.changes;
        s.svg |= self.svg;
        set(&mut s.out, self.out.clone());
        set(&mut s.format, self.format);
    }
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    /// Information cost, e.g. `wasserstein:abs:2`, `kl`, `klstar:1e-4`, `entropy`.
    #[arg(long)]
    pub cost: Option<String>,
    /// Comma-separated penalty weights.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lambdas: Vec<f64>,
    /// Initial prior: uniform, dirac:INDEX or custom:M0,M1,...
    #[arg(long)]
    pub prior: Option<String>,
    /// `fixed` or `previous`.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Comma-separated seeds; one sweep cell per lambda and seed.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Episodes averaged per cell.
    #[arg(long)]
    pub episodes: Option<usize>,
    #[command(flatten)]
    pub game: GameArgs,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl SweepArgs {
    pub fn apply(&self, s: &mut SweepSettings) {
        set(&mut s.cost, self.cost.clone());
        set_vec(&mut s.lambdas, self.lambdas.clone());
        set(&mut s.prior, self.prior.clone());
        set(&mut s.schedule, self.schedule.clone());
        set_vec(&mut s.seeds, self.seeds.clone());
        set(&mut s.episodes, self.episodes);
        self.game.apply(&mut s.game);
        set(&mut s.out, self.out.clone());
        set(&mut s.format, self.format);
    }
}

#[derive(Debug, Args, Default)]
pub struct SimulateArgs {
    /// Information cost, e.g. `wasserstein:abs:2`.
    #[arg(long)]
    pub cost: Option<String>,
    /// Penalty weight.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Initial prior: uniform, dirac:INDEX or custom:M0,M1,...
    #[arg(long)]
    pub prior: Option<String>,
    /// `fixed` or `previous`.
    #[arg(long)]
    pub schedule: Option<String>,
    /// `selfplay` or a prior for every opponent, e.g. `uniform`.
    #[arg(long)]
    pub opponents: Option<String>,
    /// Independent episodes to play.
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Base seed; each episode draws from its own stream.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub game: GameArgs,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl SimulateArgs {
    pub fn apply(&self, s: &mut SimulateSettings) {
        set(&mut s.cost, self.cost.clone());
        set(&mut s.lambda, self.lambda);
        set(&mut s.prior, self.prior.clone());
        set(&mut s.schedule, self.schedule.clone());
        set(&mut s.opponents, self.opponents.clone());
        set(&mut s.episodes, self.episodes);
        set(&mut s.seed, self.seed);
        self.game.apply(&mut s.game);
        set(&mut s.out, self.out.clone());
        set(&mut s.format, self.format);
    }
}

#[derive(Debug, Args, Default)]
pub struct BestResponseArgs {
    /// Comma-separated utilities, one per action.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub utilities: Vec<f64>,
    /// File of utilities separated by commas or whitespace.
    #[arg(long)]
    pub utilities_file: Option<PathBuf>,
    /// Prior: uniform, dirac:INDEX or custom:M0,M1,...
    #[arg(long)]
    pub prior: Option<String>,
    /// Information cost, e.g. `wasserstein:abs:1`, `kl`, `entropy`.
    #[arg(long)]
    pub cost: Option<String>,
    /// Penalty weight.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Also write the JSON to `<out>/bestresponse.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl BestResponseArgs {
    pub fn apply(&self, s: &mut BestResponseSettings) {
        set_vec(&mut s.utilities, self.utilities.clone());
        if self.utilities_file.is_some() {
            s.utilities_file = self.utilities_file.clone();
        }
        set(&mut s.prior, self.prior.clone());
        set(&mut s.cost, self.cost.clone());
        set(&mut s.lambda, self.lambda);
        if self.out.is_some() {
            s.out = self.out.clone();
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct SynthArgs {
    /// `rational`, `iidUniform` or `stickyDrift[:decay:step]`.
    #[arg(long)]
    pub generator: Option<String>,
    /// Number of subjects.
    #[arg(long)]
    pub subjects: Option<usize>,
    /// Rounds per subject.
    #[arg(long)]
    pub rounds: Option<u32>,
    /// Base seed; each subject draws from its own stream.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl SynthArgs {
    pub fn apply(&self, s: &mut SynthSettings) {
        set(&mut s.generator, self.generator.clone());
        set(&mut s.subjects, self.subjects);
        set(&mut s.rounds, self.rounds);
        set(&mut s.seed, self.seed);
        set(&mut s.out, self.out.clone());
        set(&mut s.format, self.format);
    }
}
