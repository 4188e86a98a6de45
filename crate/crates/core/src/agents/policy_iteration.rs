use super::{penalty_cost, regularized_best_response, PenaltyConfig};
use crate::envs::{evaluate_policy, FiniteMdp, DEFAULT_EVALUATION_TOLERANCE};
use crate::error::{Error, Result};
use crate::info::{make_prior, InfoCostKind};
use crate::ot::{ActionDistribution, ActionSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedPolicy {
    pub per_state: Vec<ActionDistribution>,
    /// Penalized value of each start state.
    pub values: Vec<f64>,
    /// Mean penalized value over a uniform start-state distribution.
    pub achieved_objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Penalized state values: each step earns `U` minus `lambda` times the
/// information cost of the policy in the visited state.
pub fn evaluate_regularized(
    mdp: &FiniteMdp,
    policy: &[ActionDistribution],
    priors: &[ActionDistribution],
    cost: &InfoCostKind,
    lambda: f64,
) -> Result<Vec<f64>> {
    if priors.len() != mdp.state_count() {
        return Err(Error::DimensionMismatch {
            expected: mdp.state_count(),
            got: priors.len(),
        });
    }
    let bonus = policy
        .iter()
        .zip(priors)
        .map(|(pi, q)| {
            if lambda == 0.0 {
                Ok(0.0)
            } else {
                Ok(-lambda * penalty_cost(cost, pi, q)?)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    evaluate_policy(mdp, policy, &bonus, DEFAULT_EVALUATION_TOLERANCE)
}

/// Regularized policy iteration with the same prior in every state, built
/// from `cfg.prior`.
pub fn regularized_policy_iteration(
    mdp: &FiniteMdp,
    cfg: &PenaltyConfig,
    max_iter: usize,
    tol: f64,
) -> Result<RegularizedPolicy> {
    let space = ActionSpace::new(mdp.action_count())?;
    let prior = make_prior(&cfg.prior, &space, None)?;
    let priors = vec![prior; mdp.state_count()];
    regularized_policy_iteration_with_priors(mdp, &priors, cfg, max_iter, tol)
}

/// Alternates penalized evaluation and per-state best responses to the
/// resulting Q-values, starting from the priors. Stops when no state's
/// policy moves by more than `tol` in total variation; otherwise returns the
/// last iterate with `converged = false`.
pub fn regularized_policy_iteration_with_priors(
    mdp: &FiniteMdp,
    priors: &[ActionDistribution],
    cfg: &PenaltyConfig,
    max_iter: usize,
    tol: f64,
) -> Result<RegularizedPolicy> {
    cfg.validate()?;
    mdp.check_policy(priors)?;
    let mut policy = priors.to_vec();
    let mut values = evaluate_regularized(mdp, &policy, priors, &cfg.cost, cfg.lambda)?;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let q = mdp.q_values(&values);
        let next = q
            .iter()
            .zip(priors)
            .map(|(qs, prior)| Ok(regularized_best_response(qs, prior, cfg)?.policy))
            .collect::<Result<Vec<_>>>()?;
        let mut shift: f64 = 0.0;
        for (a, b) in next.iter().zip(&policy) {
            shift = shift.max(a.total_variation(b)?);
        }
        policy = next;
        values = evaluate_regularized(mdp, &policy, priors, &cfg.cost, cfg.lambda)?;
        if shift <= tol {
            converged = true;
            break;
        }
    }
    let achieved_objective = values.iter().sum::<f64>() / values.len() as f64;
    Ok(RegularizedPolicy {
        per_state: policy,
        values,
        achieved_objective,
        iterations,
        converged,
    })
}
