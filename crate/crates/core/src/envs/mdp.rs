use crate::error::{Error, Result};
use crate::ot::ActionDistribution;

pub const DEFAULT_EVALUATION_TOLERANCE: f64 = 1e-9;
const MAX_SWEEPS: usize = 10_000_000;

/// Finite discounted MDP with dense transition and reward tables.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMdp {
    states: usize,
    actions: usize,
    /// `[s][a][s']`, flattened.
    transition: Vec<f64>,
    /// `[s][a]`, flattened.
    reward: Vec<f64>,
    discount: f64,
}

impl FiniteMdp {
    /// `transition[s][a]` is the next-state distribution, `reward[s][a]` the
    /// one-step utility.
    pub fn new(transition: Vec<Vec<Vec<f64>>>, reward: Vec<Vec<f64>>, discount: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&discount) {
            return Err(Error::InvalidDiscount(discount));
        }
        let states = transition.len();
        if states == 0 {
            return Err(Error::InvalidMdp("no states".into()));
        }
        let actions = transition[0].len();
        if actions == 0 {
            return Err(Error::InvalidMdp("no actions".into()));
        }
        if reward.len() != states {
            return Err(Error::InvalidMdp("reward table has wrong state count".into()));
        }
        let mut flat_t = Vec::with_capacity(states * actions * states);
        let mut flat_r = Vec::with_capacity(states * actions);
        for (s, (rows, rewards)) in transition.into_iter().zip(reward).enumerate() {
            if rows.len() != actions || rewards.len() != actions {
                return Err(Error::InvalidMdp(format!("state {s} has wrong action count")));
            }
            for (a, row) in rows.into_iter().enumerate() {
                if row.len() != states {
                    return Err(Error::InvalidMdp(format!(
                        "transition ({s},{a}) has length {}, expected {states}",
                        row.len()
                    )));
                }
                let row = ActionDistribution::new(row)
                    .map_err(|e| Error::InvalidMdp(format!("transition ({s},{a}): {e}")))?;
                flat_t.extend_from_slice(row.mass());
            }
            if rewards.iter().any(|r| !r.is_finite()) {
                return Err(Error::InvalidMdp(format!("non-finite reward in state {s}")));
            }
            flat_r.extend(rewards);
        }
        Ok(Self {
            states,
            actions,
            transition: flat_t,
            reward: flat_r,
            discount,
        })
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn action_count(&self) -> usize {
        self.actions
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.actions + a]
    }

    pub fn rewards(&self, s: usize) -> &[f64] {
        &self.reward[s * self.actions..(s + 1) * self.actions]
    }

    pub fn transition(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.actions + a) * self.states;
        &self.transition[start..start + self.states]
    }

    /// `Q(s, a) = r(s, a) + gamma * sum_s' P(s'|s,a) V(s')`.
    pub fn q_values(&self, values: &[f64]) -> Vec<Vec<f64>> {
        (0..self.states)
            .map(|s| {
                (0..self.actions)
                    .map(|a| {
                        let next: f64 = self
                            .transition(s, a)
                            .iter()
                            .zip(values)
                            .map(|(p, v)| p * v)
                            .sum();
                        self.reward(s, a) + self.discount * next
                    })
                    .collect()
            })
            .collect()
    }

    pub(crate) fn check_policy(&self, policy: &[ActionDistribution]) -> Result<()> {
        if policy.len() != self.states {
            return Err(Error::DimensionMismatch {
                expected: self.states,
                got: policy.len(),
            });
        }
        for pi in policy {
            if pi.size() != self.actions {
                return Err(Error::DimensionMismatch {
                    expected: self.actions,
                    got: pi.size(),
                });
            }
        }
        Ok(())
    }
}

/// Iterative evaluation of `policy` with an extra per-state reward
/// `state_bonus[s]` added each step. Stops once the sup-norm error bound
/// `gamma / (1 - gamma) * |V_k+1 - V_k|` falls to `tol`.
pub fn evaluate_policy(
    mdp: &FiniteMdp,
    policy: &[ActionDistribution],
    state_bonus: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    mdp.check_policy(policy)?;
    if state_bonus.len() != mdp.states {
        return Err(Error::DimensionMismatch {
            expected: mdp.states,
            got: state_bonus.len(),
        });
    }
    let n = mdp.states;
    let gamma = mdp.discount;
    let mut reward = vec![0.0; n];
    let mut kernel = vec![0.0; n * n];
    for s in 0..n {
        for (a, &p) in policy[s].mass().iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            reward[s] += p * mdp.reward(s, a);
            for (k, t) in kernel[s * n..(s + 1) * n]
                .iter_mut()
                .zip(mdp.transition(s, a))
            {
                *k += p * t;
            }
        }
        reward[s] += state_bonus[s];
    }
    if gamma == 0.0 {
        return Ok(reward);
    }
    let threshold = tol * (1.0 - gamma) / gamma;
    let mut values = reward.clone();
    for _ in 0..MAX_SWEEPS {
        let next: Vec<f64> = (0..n)
            .map(|s| {
                reward[s]
                    + gamma
                        * kernel[s * n..(s + 1) * n]
                            .iter()
                            .zip(&values)
                            .map(|(p, v)| p * v)
                            .sum::<f64>()
            })
            .collect();
        let delta = next
            .iter()
            .zip(&values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        values = next;
        if delta <= threshold {
            return Ok(values);
        }
    }
    Err(Error::EvaluationNotConverged(MAX_SWEEPS))
}

/// `E_pi[sum_t gamma^t U(a_t | s_t)]` from every start state.
pub fn mdp_expected_return(
    mdp: &FiniteMdp,
    policy: &[ActionDistribution],
    tol: f64,
) -> Result<Vec<f64>> {
    evaluate_policy(mdp, policy, &vec![0.0; mdp.states], tol)
}
