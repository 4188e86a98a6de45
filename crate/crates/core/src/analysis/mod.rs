//! Contribution panels, historical policies, metric tables and
//! round-to-round change statistics.

mod changes;
mod metrics;
mod panel;
pub mod svg;
mod synth;

pub use changes::{change_stats, ChangeStats, PhaseRow, STICKINESS_THRESHOLD};
pub use metrics::{metric_table, MetricKind, MetricOptions, MetricPrior, MetricReport, MetricRow};
pub use panel::{
    historical_policy, load_panel, read_panel, ContributionPanel, PanelRecord, Scope,
    DEFAULT_ENDOWMENT,
};
pub use synth::{synth_panel, Generator, DEFAULT_DECAY_RATE, DEFAULT_STEP_SCALE, GROUP_SIZE};
