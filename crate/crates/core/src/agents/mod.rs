//! Bounded-rational agents maximizing `<U, pi> - lambda * I(pi, q)`.
//!
//! For the entropy kind the charged cost is `ln |A| - H(pi)`, the divergence
//! from uniform behaviour, so that larger `lambda` pulls the policy toward
//! uniform. All other kinds charge [`info_cost`] directly. With `lambda = 0`
//! no cost is charged, even an infinite one.

mod policy_iteration;
mod selfplay;

pub use policy_iteration::{
    evaluate_regularized, regularized_policy_iteration, regularized_policy_iteration_with_priors,
    RegularizedPolicy,
};
pub use selfplay::{
    lambda_sweep, pgg_selfplay, write_sweep_csv, Opponents, SelfPlayRound, SelfPlayRun, SweepConfig,
    SweepRow,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{entropy, info_cost, smooth_prior, InfoCostKind, PriorKind};
use crate::ot::{build_cost_matrix, ActionDistribution};

/// How an agent's prior evolves over repeated play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorSchedule {
    /// The initial prior never changes.
    #[default]
    Fixed,
    /// After each round the prior becomes the agent's realized action
    /// frequency so far.
    PreviousPolicy,
}

impl fmt::Display for PriorSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PriorSchedule::Fixed => "fixed",
            PriorSchedule::PreviousPolicy => "previous",
        })
    }
}

impl FromStr for PriorSchedule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fixed" => Ok(PriorSchedule::Fixed),
            "previous" | "previous-policy" | "previousPolicy" => Ok(PriorSchedule::PreviousPolicy),
            _ => Err(Error::parse("prior schedule", s, "expected fixed or previous")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub lambda: f64,
    pub cost: InfoCostKind,
    pub prior: PriorKind,
    #[serde(default)]
    pub schedule: PriorSchedule,
}

impl PenaltyConfig {
    pub fn new(lambda: f64, cost: InfoCostKind) -> Self {
        Self {
            lambda,
            cost,
            prior: PriorKind::Uniform,
            schedule: PriorSchedule::Fixed,
        }
    }

    pub fn with_prior(mut self, prior: PriorKind, schedule: PriorSchedule) -> Self {
        self.prior = prior;
        self.schedule = schedule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidLambda(self.lambda));
        }
        Ok(())
    }
}

/// Cost charged in the penalized objective (see module docs).
pub fn penalty_cost(kind: &InfoCostKind, p: &ActionDistribution, q: &ActionDistribution) -> Result<f64> {
    match kind {
        InfoCostKind::Entropy => {
            p.check_same_space(q)?;
            Ok(((p.size() as f64).ln() - entropy(p)).max(0.0))
        }
        // The transport penalty is always the raw objective, never its root.
        InfoCostKind::Wasserstein(cfg) => {
            let raw = crate::info::OtConfig { root: false, ..*cfg };
            info_cost(&InfoCostKind::Wasserstein(raw), p, q)
        }
        other => info_cost(other, p, q),
    }
}

/// `<U, pi> - lambda * penalty_cost(pi, q)`.
pub fn penalized_objective(
    utilities: &[f64],
    p: &ActionDistribution,
    q: &ActionDistribution,
    kind: &InfoCostKind,
    lambda: f64,
) -> Result<f64> {
    if utilities.len() != p.size() {
        return Err(Error::DimensionMismatch {
            expected: p.size(),
            got: utilities.len(),
        });
    }
    let gain: f64 = utilities.iter().zip(p.mass()).map(|(u, m)| u * m).sum();
    if lambda == 0.0 {
        return Ok(gain);
    }
    Ok(gain - lambda * penalty_cost(kind, p, q)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub policy: ActionDistribution,
    pub objective: f64,
    pub info_cost: f64,
    /// Set for KL when the prior has no mass on the utility maximizer, so the
    /// unpenalized optimum is unreachable for any `lambda > 0`.
    pub optimum_outside_support: bool,
}

/// Lowest index among the maximizers.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `pi(a) ∝ base(a) * exp(U(a) / lambda)` in the log domain.
fn magnet(utilities: &[f64], base: &ActionDistribution, lambda: f64) -> Result<ActionDistribution> {
    let logits: Vec<f64> = utilities
        .iter()
        .zip(base.mass())
        .map(|(u, &b)| {
            if b > 0.0 {
                b.ln() + u / lambda
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let lse = log_sum_exp(&logits);
    let weights: Vec<f64> = logits.iter().map(|l| (l - lse).exp()).collect();
    ActionDistribution::from_weights(&weights)
}

/// Moves each prior atom `j` to `argmax_i U(i) - lambda * C[i][j]`.
fn greedy_transport(
    utilities: &[f64],
    prior: &ActionDistribution,
    cfg: &crate::info::OtConfig,
    lambda: f64,
) -> Result<ActionDistribution> {
    let n = prior.size();
    let cost = build_cost_matrix(&prior.space(), cfg.distance, cfg.order)?;
    let mut mass = vec![0.0; n];
    for (j, &qj) in prior.mass().iter().enumerate() {
        if qj == 0.0 {
            continue;
        }
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for (i, u) in utilities.iter().enumerate() {
            let value = u - lambda * cost.get(i, j);
            if value > best_value {
                best = i;
                best_value = value;
            }
        }
        mass[best] += qj;
    }
    ActionDistribution::from_weights(&mass)
}

/// One-step penalized best response to `utilities` given prior `prior`.
///
/// - entropy: `softmax(U / lambda)`;
/// - kl / klstar: `pi ∝ q~ exp(U / lambda)` with `q~` the (smoothed) prior;
/// - wasserstein: per-column greedy transport of the prior, which is exact
///   because the joint problem over `(pi, T)` separates by prior atom.
///
/// `lambda = 0` returns the Dirac at the lowest-index maximizer of `U`.
pub fn regularized_best_response(
    utilities: &[f64],
    prior: &ActionDistribution,
    penalty: &PenaltyConfig,
) -> Result<BestResponse> {
    penalty.validate()?;
    let n = prior.size();
    if utilities.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: utilities.len(),
        });
    }
    if utilities.iter().any(|u| !u.is_finite()) {
        return Err(Error::NonFiniteUtility);
    }
    penalty.cost.validate(n)?;
    let lambda = penalty.lambda;
    let best = argmax(utilities);
    let optimum_outside_support = matches!(penalty.cost, InfoCostKind::Kl) && prior.get(best) == 0.0;

    let policy = if lambda == 0.0 {
        ActionDistribution::dirac(n, best)?
    } else {
        match &penalty.cost {
            InfoCostKind::Entropy => magnet(utilities, &ActionDistribution::uniform(n)?, lambda)?,
            InfoCostKind::Kl => magnet(utilities, prior, lambda)?,
            InfoCostKind::KlStar { epsilon } => {
                magnet(utilities, &smooth_prior(prior, *epsilon)?, lambda)?
            }
            InfoCostKind::Wasserstein(cfg) => greedy_transport(utilities, prior, cfg, lambda)?,
        }
    };
    let info_cost = penalty_cost(&penalty.cost, &policy, prior)?;
    let objective = penalized_objective(utilities, &policy, prior, &penalty.cost, lambda)?;
    Ok(BestResponse {
        policy,
        objective,
        info_cost,
        optimum_outside_support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::OtConfig;

    fn cfg(lambda: f64, cost: &str) -> PenaltyConfig {
        PenaltyConfig::new(lambda, cost.parse().unwrap())
    }

    #[test]
    fn zero_lambda_is_dirac_at_argmax() {
        let u = [0.3, 2.0, 2.0, -1.0];
        let q = ActionDistribution::uniform(4).unwrap();
        for kind in ["entropy", "kl", "klstar:1e-3", "wasserstein", "wasserstein:abs:2"] {
            let br = regularized_best_response(&u, &q, &cfg(0.0, kind)).unwrap();
            assert_eq!(br.policy, ActionDistribution::dirac(4, 1).unwrap(), "{kind}");
        }
    }

    #[test]
    fn five_action_transport_example() {
        let u = [0.0, 0.0, 0.0, 0.0, 1.0];
        let q = ActionDistribution::uniform(5).unwrap();
        let br = regularized_best_response(&u, &q, &cfg(0.5, "wasserstein:abs:1")).unwrap();
        let expected = [0.2, 0.2, 0.2, 0.0, 0.4];
        for (a, b) in br.policy.mass().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_two_action_softmax() {
        let q = ActionDistribution::uniform(2).unwrap();
        let br = regularized_best_response(&[1.0, 0.0], &q, &cfg(1.0, "entropy")).unwrap();
        let e = 1f64.exp();
        assert!((br.policy.get(0) - e / (e + 1.0)).abs() < 1e-12);
        assert!((br.policy.get(0) - 0.7311).abs() < 1e-4);
    }

    #[test]
    fn kl_flags_unreachable_optimum() {
        let q = ActionDistribution::new(vec![0.5, 0.5, 0.0]).unwrap();
        let u = [0.0, 1.0, 5.0];
        let br = regularized_best_response(&u, &q, &cfg(1.0, "kl")).unwrap();
        assert!(br.optimum_outside_support);
        assert_eq!(br.policy.get(2), 0.0);
        let br0 = regularized_best_response(&u, &q, &cfg(0.0, "kl")).unwrap();
        assert!(br0.optimum_outside_support);
        assert_eq!(br0.policy.get(2), 1.0);
        let star = regularized_best_response(&u, &q, &cfg(1.0, "klstar:1e-3")).unwrap();
        assert!(!star.optimum_outside_support);
        assert!(star.policy.get(2) > 0.0);
    }

    #[test]
    fn huge_lambda_keeps_prior() {
        let q = ActionDistribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let u = [4.0, -1.0, 2.0, 0.5];
        let cost = InfoCostKind::Wasserstein(OtConfig::default());
        let br = regularized_best_response(&u, &q, &PenaltyConfig::new(1e6, cost)).unwrap();
        assert!(br.policy.total_variation(&q).unwrap() <= 1e-3);
    }

    #[test]
    fn rejects_invalid_inputs() {
        let q = ActionDistribution::uniform(3).unwrap();
        assert!(matches!(
            regularized_best_response(&[0.0, 1.0, 2.0], &q, &cfg(-1.0, "kl")),
            Err(Error::InvalidLambda(_))
        ));
        assert!(regularized_best_response(&[0.0, f64::NAN, 2.0], &q, &cfg(1.0, "kl")).is_err());
        assert!(regularized_best_response(&[0.0, 1.0], &q, &cfg(1.0, "kl")).is_err());
    }

    #[test]
    fn schedule_parse() {
        assert_eq!("fixed".parse::<PriorSchedule>().unwrap(), PriorSchedule::Fixed);
        assert_eq!(
            "previous".parse::<PriorSchedule>().unwrap(),
            PriorSchedule::PreviousPolicy
        );
        assert!("later".parse::<PriorSchedule>().is_err());
    }
}
