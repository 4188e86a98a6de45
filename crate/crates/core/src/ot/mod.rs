//! Discrete optimal transport between distributions on an ordinal action space.
//!
//! Plans are indexed `T[i][j]` with row `i` the policy action and column `j`
//! the prior action. Columns sum to the prior (mass supplied) and rows sum to
//! the policy (mass demanded). The reported distance is the raw transport
//! objective `sum C[i][j] T[i][j]`; [`OtSolution::rooted_distance`] gives the
//! `order`-th root.

mod cost;
mod distribution;
mod simplex;
mod sinkhorn;

pub use cost::{build_cost_matrix, CostMatrix, GroundDistance};
pub use distribution::{ActionDistribution, ActionSpace, NORMALIZATION_TOLERANCE};
pub use sinkhorn::{sinkhorn_approx, SINKHORN_ZERO_FILL};

use crate::error::{Error, Result};

/// Nonnegative coupling with prescribed marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    size: usize,
    entries: Vec<f64>,
}

impl TransportPlan {
    pub(crate) fn from_entries(size: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), size * size);
        Self { size, entries }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Row sums, i.e. the policy marginal.
    pub fn row_sums(&self) -> Vec<f64> {
        self.entries
            .chunks(self.size)
            .map(|r| r.iter().sum())
            .collect()
    }

    /// Column sums, i.e. the prior marginal.
    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.size];
        for row in self.entries.chunks(self.size) {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    /// Largest absolute deviation of either marginal from its target.
    pub fn marginal_residual(&self, policy: &ActionDistribution, prior: &ActionDistribution) -> f64 {
        let rows = self.row_sums();
        let cols = self.col_sums();
        rows.iter()
            .zip(policy.mass())
            .chain(cols.iter().zip(prior.mass()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn cost(&self, cost: &CostMatrix) -> f64 {
        self.entries
            .iter()
            .zip(cost.entries())
            .map(|(t, c)| t * c)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct OtSolution {
    pub distance: f64,
    pub plan: TransportPlan,
    /// Potentials on prior (column) actions.
    pub dual_source: Vec<f64>,
    /// Potentials on policy (row) actions.
    pub dual_target: Vec<f64>,
    pub iterations: usize,
    pub order: u32,
    basis: Vec<usize>,
}

impl OtSolution {
    pub fn rooted_distance(&self) -> f64 {
        if self.order == 1 {
            self.distance
        } else {
            self.distance.powf(1.0 / self.order as f64)
        }
    }

    /// `sum p_i u_i + sum q_j v_j`.
    pub fn dual_objective(&self, policy: &ActionDistribution, prior: &ActionDistribution) -> f64 {
        let rows: f64 = policy
            .mass()
            .iter()
            .zip(&self.dual_target)
            .map(|(p, u)| p * u)
            .sum();
        let cols: f64 = prior
            .mass()
            .iter()
            .zip(&self.dual_source)
            .map(|(q, v)| q * v)
            .sum();
        rows + cols
    }

    /// Cells of the final simplex basis (empty for approximate solutions).
    pub fn basic_cells(&self) -> Vec<(usize, usize)> {
        let n = self.plan.size();
        self.basis.iter().map(|&c| (c / n, c % n)).collect()
    }
}

fn check_shapes(p: &ActionDistribution, q: &ActionDistribution, cost: &CostMatrix) -> Result<()> {
    p.check_same_space(q)?;
    if cost.size() != p.size() {
        return Err(Error::DimensionMismatch {
            expected: p.size(),
            got: cost.size(),
        });
    }
    Ok(())
}

/// Exact optimal transport from `prior` to `policy` by the transportation simplex.
pub fn wasserstein_exact(
    policy: &ActionDistribution,
    prior: &ActionDistribution,
    cost: &CostMatrix,
) -> Result<OtSolution> {
    check_shapes(policy, prior, cost)?;
    let sol = simplex::solve(policy.mass(), prior.mass(), cost.entries())?;
    let plan = TransportPlan::from_entries(policy.size(), sol.flow);
    Ok(OtSolution {
        distance: plan.cost(cost),
        plan,
        dual_source: sol.col_potential,
        dual_target: sol.row_potential,
        iterations: sol.pivots,
        order: cost.order(),
        basis: sol.basis,
    })
}

/// `sum_k |F_p(k) - F_q(k)|`, the first-order distance under `|i - j|`.
pub fn wasserstein_1d_closed_form(p: &ActionDistribution, q: &ActionDistribution) -> Result<f64> {
    p.check_same_space(q)?;
    let mut fp = 0.0;
    let mut fq = 0.0;
    let mut total = 0.0;
    for (a, b) in p.mass().iter().zip(q.mass()).take(p.size() - 1) {
        fp += a;
        fq += b;
        total += (fp - fq).abs();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_cost(n: usize) -> CostMatrix {
        build_cost_matrix(&ActionSpace::new(n).unwrap(), GroundDistance::Absolute, 1).unwrap()
    }

    #[test]
    fn identical_distributions_zero_with_diagonal_plan() {
        let p = ActionDistribution::new(vec![0.1, 0.0, 0.6, 0.3]).unwrap();
        let sol = wasserstein_exact(&p, &p, &abs_cost(4)).unwrap();
        assert_eq!(sol.distance, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { p.get(i) } else { 0.0 };
                assert!((sol.plan.get(i, j) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dirac_to_dirac_forced_plan() {
        let p = ActionDistribution::dirac(41, 0).unwrap();
        let q = ActionDistribution::dirac(41, 40).unwrap();
        let sol = wasserstein_exact(&p, &q, &abs_cost(41)).unwrap();
        assert_eq!(sol.distance, 40.0);
        assert_eq!(sol.plan.get(0, 40), 1.0);
        assert_eq!(wasserstein_1d_closed_form(&p, &q).unwrap(), 40.0);
    }

    #[test]
    fn single_action_space() {
        let p = ActionDistribution::dirac(1, 0).unwrap();
        let sol = wasserstein_exact(&p, &p, &abs_cost(1)).unwrap();
        assert_eq!(sol.distance, 0.0);
        assert_eq!(sol.basic_cells(), vec![(0, 0)]);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let p = ActionDistribution::uniform(3).unwrap();
        let q = ActionDistribution::uniform(4).unwrap();
        assert!(matches!(
            wasserstein_exact(&p, &q, &abs_cost(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(wasserstein_exact(&p, &p, &abs_cost(4)).is_err());
        assert!(wasserstein_1d_closed_form(&p, &q).is_err());
    }

    #[test]
    fn rooted_distance_for_second_order() {
        let space = ActionSpace::new(5).unwrap();
        let c = build_cost_matrix(&space, GroundDistance::Absolute, 2).unwrap();
        let p = ActionDistribution::dirac(5, 1).unwrap();
        let q = ActionDistribution::dirac(5, 4).unwrap();
        let sol = wasserstein_exact(&p, &q, &c).unwrap();
        assert_eq!(sol.distance, 9.0);
        assert!((sol.rooted_distance() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn complementary_slackness_on_basis() {
        let p = ActionDistribution::new(vec![0.2, 0.0, 0.3, 0.5, 0.0]).unwrap();
        let q = ActionDistribution::new(vec![0.0, 0.4, 0.0, 0.1, 0.5]).unwrap();
        let space = ActionSpace::new(5).unwrap();
        let c = build_cost_matrix(&space, GroundDistance::Fixed { value: 3.0 }, 1).unwrap();
        let sol = wasserstein_exact(&p, &q, &c).unwrap();
        assert_eq!(sol.basic_cells().len(), 9);
        for (i, j) in sol.basic_cells() {
            let slack = c.get(i, j) - sol.dual_target[i] - sol.dual_source[j];
            assert!(slack.abs() < 1e-7);
        }
        // Under a fixed cost, W = D * TV.
        let tv = p.total_variation(&q).unwrap();
        assert!((sol.distance - 3.0 * tv).abs() < 1e-12);
    }
}
