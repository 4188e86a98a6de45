use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use super::panel::{historical_policy, ContributionPanel, Scope};
use crate::error::{Error, Result};
use crate::info::{
    check_epsilon, entropy, kl_divergence, kl_star, serialize_extended, wasserstein_cost, OtConfig,
    DEFAULT_KL_STAR_EPSILON,
};
use crate::ot::ActionDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(into = "String")]
pub enum MetricPrior {
    Uniform,
    /// Historical policy of the previous round.
    PreviousPolicy,
    /// Dirac at contribution 0.
    OptimalDirac,
}

impl MetricPrior {
    pub const ALL: [MetricPrior; 3] = [Self::Uniform, Self::PreviousPolicy, Self::OptimalDirac];
}

impl fmt::Display for MetricPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::PreviousPolicy => "previousPolicy",
            Self::OptimalDirac => "optimalDirac",
        })
    }
}

impl From<MetricPrior> for String {
    fn from(p: MetricPrior) -> Self {
        p.to_string()
    }
}

impl FromStr for MetricPrior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "previousPolicy" | "previous" => Ok(Self::PreviousPolicy),
            "optimalDirac" | "optimal" | "dirac" => Ok(Self::OptimalDirac),
            _ => Err(Error::parse("metric prior", s, "expected uniform, previousPolicy or optimalDirac")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(into = "String")]
pub enum MetricKind {
    Entropy,
    KlStar,
    Wasserstein,
    /// Unsmoothed KL, reported alongside the others.
    Kl,
}

impl MetricKind {
    pub const TABLE: [MetricKind; 3] = [Self::Entropy, Self::KlStar, Self::Wasserstein];
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Entropy => "entropy",
            Self::KlStar => "klStar",
            Self::Wasserstein => "wasserstein",
            Self::Kl => "kl",
        })
    }
}

impl From<MetricKind> for String {
    fn from(m: MetricKind) -> Self {
        m.to_string()
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entropy" => Ok(Self::Entropy),
            "klStar" | "klstar" => Ok(Self::KlStar),
            "wasserstein" => Ok(Self::Wasserstein),
            "kl" => Ok(Self::Kl),
            _ => Err(Error::parse("metric", s, "expected entropy, klStar, wasserstein or kl")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricOptions {
    pub scope: Scope,
    pub priors: Vec<MetricPrior>,
    pub metrics: Vec<MetricKind>,
    /// Also report raw KL for every prior.
    pub include_kl: bool,
    pub kl_star_epsilon: f64,
    pub ot: OtConfig,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            scope: Scope::Pooled,
            priors: MetricPrior::ALL.to_vec(),
            metrics: MetricKind::TABLE.to_vec(),
            include_kl: true,
            kl_star_epsilon: DEFAULT_KL_STAR_EPSILON,
            ot: OtConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricRow {
    pub round: u32,
    pub prior: MetricPrior,
    pub metric: MetricKind,
    #[serde(serialize_with = "serialize_extended")]
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricReport {
    pub rows: Vec<MetricRow>,
}

impl MetricReport {
    pub fn get(&self, round: u32, prior: MetricPrior, metric: MetricKind) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.round == round && r.prior == prior && r.metric == metric)
            .map(|r| r.value)
    }

    pub fn rounds(&self) -> Vec<u32> {
        let mut r: Vec<u32> = self.rows.iter().map(|r| r.round).collect();
        r.dedup();
        r
    }

    /// `(round, value)` series for one prior and metric.
    pub fn series(&self, prior: MetricPrior, metric: MetricKind) -> Vec<(u32, f64)> {
        self.rows
            .iter()
            .filter(|r| r.prior == prior && r.metric == metric)
            .map(|r| (r.round, r.value))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rows).expect("metric rows serialize")
    }
}

/// For every round `t >= 2` present in the panel, compares the historical
/// policy at `t` with each prior under each metric. Rows are ordered by
/// round, then prior, then metric.
pub fn metric_table(panel: &ContributionPanel, opts: &MetricOptions) -> Result<MetricReport> {
    let rounds: Vec<u32> = panel.rounds().into_iter().filter(|&t| t >= 2).collect();
    if rounds.is_empty() {
        return Err(Error::TooFewRounds);
    }
    let n = panel.action_count();
    check_epsilon(opts.kl_star_epsilon, n)?;
    let uniform = ActionDistribution::uniform(n)?;
    let dirac = ActionDistribution::dirac(n, 0)?;
    let mut metrics = opts.metrics.clone();
    if opts.include_kl && !metrics.contains(&MetricKind::Kl) {
        metrics.push(MetricKind::Kl);
    }

    let mut rows = Vec::new();
    for t in rounds {
        let policy = historical_policy(panel, &opts.scope, t)?;
        let h = entropy(&policy);
        for &prior_kind in &opts.priors {
            let prior = match prior_kind {
                MetricPrior::Uniform => uniform.clone(),
                MetricPrior::PreviousPolicy => historical_policy(panel, &opts.scope, t - 1)?,
                MetricPrior::OptimalDirac => dirac.clone(),
            };
            for &metric in &metrics {
                let value = match metric {
                    MetricKind::Entropy => h,
                    MetricKind::KlStar => kl_star(&policy, &prior, opts.kl_star_epsilon)?,
                    MetricKind::Wasserstein => wasserstein_cost(&policy, &prior, &opts.ot)?,
                    MetricKind::Kl => kl_divergence(&policy, &prior)?,
                };
                rows.push(MetricRow {
                    round: t,
                    prior: prior_kind,
                    metric,
                    value,
                });
            }
        }
    }
    Ok(MetricReport { rows })
}
