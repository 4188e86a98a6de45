//! Entropic optimal transport, an approximate path for large action spaces.
//!
//! The plan is `T[i][j] = exp((f_i + g_j - C[i][j]) / reg)`. Potentials are
//! found by geometric annealing of the regularization (start at the largest
//! cost, halve down to the target) with warm starts. Each stage runs a few
//! log-domain Sinkhorn sweeps and then damped Newton steps on the dual, since
//! plain sweeps stall at small `reg` when the unregularized problem has many
//! optimal plans (the usual case for `|i - j|` costs).
//!
//! The reported distance is the transport cost `<C, T>` of the entropic plan.
//! For identical inputs it is at most `reg * ln(size)`; in general it exceeds
//! the exact value by an entropic bias that shrinks linearly with `reg`.
//! Zero masses are replaced by [`SINKHORN_ZERO_FILL`] (then renormalized), so
//! this solver never returns an exact-support plan.

use nalgebra::{DMatrix, DVector};

use super::{check_shapes, ActionDistribution, CostMatrix, OtSolution, TransportPlan};
use crate::error::{Error, Result};

pub const SINKHORN_ZERO_FILL: f64 = 1e-12;

const STAGE_TOLERANCE: f64 = 1e-4;
const SWEEPS_PER_STAGE: usize = 20;
const MAX_BACKTRACKS: usize = 40;
const MAX_EXPONENT_STEP: f64 = 20.0;

fn smoothed(d: &ActionDistribution) -> Vec<f64> {
    let filled: Vec<f64> = d
        .mass()
        .iter()
        .map(|&m| if m > 0.0 { m } else { SINKHORN_ZERO_FILL })
        .collect();
    let sum: f64 = filled.iter().sum();
    filled.iter().map(|m| m / sum).collect()
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

struct State<'a> {
    n: usize,
    cost: &'a [f64],
    a: Vec<f64>,
    b: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
}

struct Marginals {
    plan: Vec<f64>,
    rows: Vec<f64>,
    cols: Vec<f64>,
}

impl Marginals {
    /// L1 deviation of both marginals from their targets.
    fn residual(&self, a: &[f64], b: &[f64]) -> f64 {
        let r: f64 = self.rows.iter().zip(a).map(|(x, y)| (x - y).abs()).sum();
        let c: f64 = self.cols.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
        r + c
    }
}

impl State<'_> {
    fn sweep(&mut self, reg: f64) {
        let n = self.n;
        for i in 0..n {
            let row = &self.cost[i * n..(i + 1) * n];
            let g = &self.g;
            let lse = log_sum_exp((0..n).map(|j| (g[j] - row[j]) / reg));
            self.f[i] = reg * (self.a[i].ln() - lse);
        }
        for j in 0..n {
            let f = &self.f;
            let cost = self.cost;
            let lse = log_sum_exp((0..n).map(|i| (f[i] - cost[i * n + j]) / reg));
            self.g[j] = reg * (self.b[j].ln() - lse);
        }
    }

    fn marginals(&self, f: &[f64], g: &[f64], reg: f64) -> Marginals {
        let n = self.n;
        let mut plan = vec![0.0; n * n];
        let mut rows = vec![0.0; n];
        let mut cols = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let t = ((f[i] + g[j] - self.cost[i * n + j]) / reg).exp();
                plan[i * n + j] = t;
                rows[i] += t;
                cols[j] += t;
            }
        }
        Marginals { plan, rows, cols }
    }

    /// One damped Newton step on the dual with the last column potential
    /// fixed. Returns the new marginals, or `None` if no step made progress.
    fn newton_step(&mut self, reg: f64, current: &Marginals) -> Option<Marginals> {
        let n = self.n;
        let dim = 2 * n - 1;
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = DVector::<f64>::zeros(dim);
        for i in 0..n {
            h[(i, i)] = current.rows[i] / reg;
            rhs[i] = self.a[i] - current.rows[i];
            for j in 0..n - 1 {
                let t = current.plan[i * n + j] / reg;
                h[(i, n + j)] = t;
                h[(n + j, i)] = t;
            }
        }
        for j in 0..n - 1 {
            h[(n + j, n + j)] = current.cols[j] / reg;
            rhs[n + j] = self.b[j] - current.cols[j];
        }
        // Rows or columns whose plan mass underflows make the Hessian
        // singular; add the smallest diagonal shift that admits a Cholesky
        // factorization.
        let max_diag = (0..dim).map(|k| h[(k, k)]).fold(0.0, f64::max);
        let mut shift = 1e-12 * max_diag.max(1.0);
        let mut step = loop {
            if let Some(ch) = h.clone().cholesky() {
                break ch.solve(&rhs);
            }
            if shift > max_diag {
                return None;
            }
            for k in 0..dim {
                h[(k, k)] += shift;
            }
            shift *= 100.0;
        };
        if step.iter().any(|v| !v.is_finite()) {
            return None;
        }
        // Near-null directions (weakly coupled blocks of the plan) give huge
        // steps; cap the change of any exponent per step.
        let largest = step.amax();
        if largest > MAX_EXPONENT_STEP * reg {
            step *= MAX_EXPONENT_STEP * reg / largest;
        }

        let base = grad_norm(current, &self.a, &self.b);
        let base_dual = self.dual(&self.f, &self.g, current, reg);
        let slope: f64 = rhs.dot(&step);
        let mut t = 1.0;
        for _ in 0..MAX_BACKTRACKS {
            let f: Vec<f64> = (0..n).map(|i| self.f[i] + t * step[i]).collect();
            let g: Vec<f64> = (0..n)
                .map(|j| {
                    if j < n - 1 {
                        self.g[j] + t * step[n + j]
                    } else {
                        self.g[j]
                    }
                })
                .collect();
            let trial = self.marginals(&f, &g, reg);
            let dual = self.dual(&f, &g, &trial, reg);
            // Armijo on the concave dual; once the predicted gain drops below
            // rounding, fall back to a decrease of the gradient norm.
            let accepted = if slope * t > 1e-13 * base_dual.abs().max(1.0) {
                dual >= base_dual + 1e-4 * t * slope
            } else {
                grad_norm(&trial, &self.a, &self.b) < base
            };
            if dual.is_finite() && accepted {
                self.f = f;
                self.g = g;
                return Some(trial);
            }
            t *= 0.5;
        }
        None
    }

    /// `<a, f> + <b, g> - reg * sum T`.
    fn dual(&self, f: &[f64], g: &[f64], m: &Marginals, reg: f64) -> f64 {
        let fa: f64 = f.iter().zip(&self.a).map(|(x, y)| x * y).sum();
        let gb: f64 = g.iter().zip(&self.b).map(|(x, y)| x * y).sum();
        fa + gb - reg * m.rows.iter().sum::<f64>()
    }

    /// Sweeps then Newton steps until the residual reaches `tol`, within the
    /// remaining iteration budget.
    fn run_stage(&mut self, reg: f64, tol: f64, iterations: &mut usize, max_iter: usize) -> f64 {
        for _ in 0..SWEEPS_PER_STAGE {
            if *iterations >= max_iter {
                break;
            }
            self.sweep(reg);
            *iterations += 1;
        }
        let mut current = self.marginals(&self.f, &self.g, reg);
        let mut residual = current.residual(&self.a, &self.b);
        while residual > tol && *iterations < max_iter {
            *iterations += 1;
            match self.newton_step(reg, &current) {
                Some(next) => current = next,
                None => {
                    self.sweep(reg);
                    current = self.marginals(&self.f, &self.g, reg);
                }
            }
            residual = current.residual(&self.a, &self.b);
        }
        residual
    }
}

fn grad_norm(m: &Marginals, a: &[f64], b: &[f64]) -> f64 {
    let r: f64 = m.rows.iter().zip(a).map(|(x, y)| (x - y).powi(2)).sum();
    let c: f64 = m.cols.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (r + c).sqrt()
}

/// Approximate transport with entropic regularization `reg`.
///
/// `max_iter` bounds the total number of sweeps plus Newton steps; `tol`
/// bounds the summed L1 residual of both marginals. Running out of
/// iterations is reported as [`Error::SinkhornNotConverged`].
pub fn sinkhorn_approx(
    policy: &ActionDistribution,
    prior: &ActionDistribution,
    cost: &CostMatrix,
    reg: f64,
    max_iter: usize,
    tol: f64,
) -> Result<OtSolution> {
    check_shapes(policy, prior, cost)?;
    if !(reg.is_finite() && reg > 0.0) {
        return Err(Error::InvalidRegularization(reg));
    }
    let n = policy.size();
    let mut state = State {
        n,
        cost: cost.entries(),
        a: smoothed(policy),
        b: smoothed(prior),
        f: vec![0.0; n],
        g: vec![0.0; n],
    };

    let mut iterations = 0;
    let mut stage_reg = cost.max_entry().max(reg);
    while stage_reg > reg {
        state.run_stage(stage_reg, STAGE_TOLERANCE.max(tol), &mut iterations, max_iter);
        stage_reg = (stage_reg * 0.5).max(reg);
    }
    let residual = state.run_stage(reg, tol, &mut iterations, max_iter);
    if residual > tol {
        return Err(Error::SinkhornNotConverged {
            iterations,
            residual,
        });
    }

    let plan = TransportPlan::from_entries(n, state.marginals(&state.f, &state.g, reg).plan);
    Ok(OtSolution {
        distance: plan.cost(cost),
        plan,
        dual_source: state.g,
        dual_target: state.f,
        iterations,
        order: cost.order(),
        basis: Vec::new(),
    })
}
