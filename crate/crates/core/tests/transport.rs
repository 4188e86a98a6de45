use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wbr_core::ot::{
    build_cost_matrix, sinkhorn_approx, wasserstein_1d_closed_form, wasserstein_exact,
    ActionDistribution, ActionSpace, CostMatrix, GroundDistance,
};

fn cost(n: usize, d: GroundDistance, order: u32) -> CostMatrix {
    build_cost_matrix(&ActionSpace::new(n).unwrap(), d, order).unwrap()
}

/// Random distribution with roughly half the entries zeroed.
fn random_dist(rng: &mut impl Rng, n: usize) -> ActionDistribution {
    loop {
        let w: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.5) {
                    0.0
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        if w.iter().sum::<f64>() > 0.0 {
            return ActionDistribution::from_weights(&w).unwrap();
        }
    }
}

/// Minimum of the transport objective over all vertices of the n x n
/// transportation polytope, by enumerating every (2n-1)-cell basis.
fn brute_force_vertices(p: &[f64], q: &[f64], c: &CostMatrix) -> f64 {
    let n = p.len();
    let cells = n * n;
    let k = 2 * n - 1;
    let mut best = f64::INFINITY;
    let mut choose = (0..k).collect::<Vec<usize>>();
    loop {
        // rows: n row-sum constraints then n-1 column-sum constraints
        let mut a = DMatrix::<f64>::zeros(k, k);
        let mut b = DVector::<f64>::zeros(k);
        for (col, &cell) in choose.iter().enumerate() {
            let (i, j) = (cell / n, cell % n);
            a[(i, col)] = 1.0;
            if j < n - 1 {
                a[(n + j, col)] = 1.0;
            }
        }
        for i in 0..n {
            b[i] = p[i];
        }
        for j in 0..n - 1 {
            b[n + j] = q[j];
        }
        if let Some(x) = a.clone().lu().solve(&b) {
            if a.determinant().abs() > 1e-9 && x.iter().all(|&v| v >= -1e-12) {
                let obj: f64 = choose
                    .iter()
                    .zip(x.iter())
                    .map(|(&cell, v)| c.entries()[cell] * v)
                    .sum();
                best = best.min(obj);
            }
        }
        // next combination
        let mut idx = k;
        loop {
            if idx == 0 {
                return best;
            }
            idx -= 1;
            if choose[idx] < cells - k + idx {
                break;
            }
        }
        choose[idx] += 1;
        for t in idx + 1..k {
            choose[t] = choose[t - 1] + 1;
        }
    }
}

/// Generic LP solve of the transportation problem.
fn lp_transport(p: &[f64], q: &[f64], c: &CostMatrix) -> f64 {
    let n = p.len();
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..n * n)
        .map(|k| problem.add_var(c.entries()[k], (0.0, f64::INFINITY)))
        .collect();
    for i in 0..n {
        let row: Vec<_> = (0..n).map(|j| (vars[i * n + j], 1.0)).collect();
        problem.add_constraint(&row, ComparisonOp::Eq, p[i]);
    }
    for j in 0..n {
        let col: Vec<_> = (0..n).map(|i| (vars[i * n + j], 1.0)).collect();
        problem.add_constraint(&col, ComparisonOp::Eq, q[j]);
    }
    problem.solve().unwrap().objective()
}

#[test]
fn three_action_example_matches_vertex_enumeration() {
    let p = ActionDistribution::new(vec![0.5, 0.5, 0.0]).unwrap();
    let q = ActionDistribution::new(vec![0.0, 0.5, 0.5]).unwrap();
    let c = cost(3, GroundDistance::Absolute, 1);
    let oracle = brute_force_vertices(p.mass(), q.mass(), &c);
    assert!((oracle - 1.0).abs() < 1e-12, "oracle = {oracle}");
    let sol = wasserstein_exact(&p, &q, &c).unwrap();
    assert!((sol.distance - 1.0).abs() < 1e-12);
    assert!((wasserstein_1d_closed_form(&p, &q).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn small_problems_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let kinds = [
        (GroundDistance::Absolute, 1),
        (GroundDistance::Absolute, 2),
        (GroundDistance::Fixed { value: 2.5 }, 1),
        (
            GroundDistance::Boundary {
                index: 2,
                penalty: 3.0,
            },
            1,
        ),
    ];
    for _ in 0..25 {
        for &(d, order) in &kinds {
            let n = 4;
            let c = cost(n, d, order);
            let p = random_dist(&mut rng, n);
            let q = random_dist(&mut rng, n);
            let oracle = brute_force_vertices(p.mass(), q.mass(), &c);
            let sol = wasserstein_exact(&p, &q, &c).unwrap();
            assert!((sol.distance - oracle).abs() < 1e-9, "{d:?}: {} vs {oracle}", sol.distance);
        }
    }
}

#[test]
fn general_costs_match_generic_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..40 {
        let n = 12 + trial % 10;
        let (d, order) = match trial % 3 {
            0 => (GroundDistance::Absolute, 2),
            1 => (GroundDistance::Fixed { value: 4.0 }, 1),
            _ => (
                GroundDistance::Boundary {
                    index: n / 2,
                    penalty: 5.0,
                },
                2,
            ),
        };
        let c = cost(n, d, order);
        let p = random_dist(&mut rng, n);
        let q = random_dist(&mut rng, n);
        let lp = lp_transport(p.mass(), q.mass(), &c);
        let sol = wasserstein_exact(&p, &q, &c).unwrap();
        assert!(
            (sol.distance - lp).abs() <= 1e-7 * lp.max(1.0),
            "trial {trial}: {} vs {lp}",
            sol.distance
        );
    }
}

#[test]
fn feasibility_and_duality_certificates() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..200 {
        let n = 41;
        let c = if trial % 2 == 0 {
            cost(n, GroundDistance::Absolute, 1)
        } else {
            cost(n, GroundDistance::Absolute, 2)
        };
        let p = random_dist(&mut rng, n);
        let q = random_dist(&mut rng, n);
        let sol = wasserstein_exact(&p, &q, &c).unwrap();
        assert!(sol.plan.min_entry() >= 0.0);
        assert!(sol.plan.marginal_residual(&p, &q) <= 1e-8);
        assert!((sol.distance - sol.plan.cost(&c)).abs() <= 1e-9);
        for (i, j) in sol.basic_cells() {
            let slack = c.get(i, j) - sol.dual_target[i] - sol.dual_source[j];
            assert!(slack.abs() <= 1e-7);
        }
        for i in 0..n {
            for j in 0..n {
                assert!(c.get(i, j) - sol.dual_target[i] - sol.dual_source[j] >= -1e-7);
            }
        }
        let gap = sol.distance - sol.dual_objective(&p, &q);
        assert!(gap.abs() <= 1e-7, "gap {gap}");
    }
}

#[test]
fn scaling_the_ground_metric_scales_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = cost(41, GroundDistance::Absolute, 1);
    for &k in &[0.25, 3.0, 17.5] {
        let scaled = c.scaled(k).unwrap();
        for _ in 0..20 {
            let p = random_dist(&mut rng, 41);
            let q = random_dist(&mut rng, 41);
            let base = wasserstein_exact(&p, &q, &c).unwrap().distance;
            let big = wasserstein_exact(&p, &q, &scaled).unwrap().distance;
            assert!((big - k * base).abs() <= 1e-9 * (k * base).max(1.0));
        }
    }
}

#[test]
fn tied_marginals_do_not_cycle() {
    // Many equal masses force degenerate bases.
    let n = 41;
    let c = cost(n, GroundDistance::Fixed { value: 1.0 }, 1);
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for i in (0..n).step_by(2) {
        p[i] = 1.0;
    }
    for i in (0..n).step_by(3) {
        q[i] = 1.0;
    }
    let p = ActionDistribution::from_weights(&p).unwrap();
    let q = ActionDistribution::from_weights(&q).unwrap();
    let sol = wasserstein_exact(&p, &q, &c).unwrap();
    let tv = p.total_variation(&q).unwrap();
    assert!((sol.distance - tv).abs() < 1e-9);
}

#[test]
fn sinkhorn_tracks_exact_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let c = cost(41, GroundDistance::Absolute, 1);
    for _ in 0..100 {
        let p = random_dist(&mut rng, 41);
        let q = random_dist(&mut rng, 41);
        let exact = wasserstein_exact(&p, &q, &c).unwrap().distance;
        let approx = sinkhorn_approx(&p, &q, &c, 1e-3, 200_000, 1e-8).unwrap();
        assert!((approx.distance - exact).abs() <= 0.05, "{} vs {exact}", approx.distance);
        let rows = approx.plan.row_sums();
        let cols = approx.plan.col_sums();
        let resid: f64 = rows
            .iter()
            .zip(p.mass())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
        assert!(resid <= 1e-8 + 41.0 * 1e-12);
        let cresid: f64 = cols.iter().zip(q.mass()).map(|(a, b)| (a - b).abs()).sum();
        assert!(cresid <= 1e-8 + 41.0 * 1e-12);
    }
}

#[test]
fn sinkhorn_dirac_pairs_near_index_distance() {
    let c = cost(41, GroundDistance::Absolute, 1);
    for &(i, j) in &[(0, 40), (5, 7), (20, 20), (33, 2)] {
        let p = ActionDistribution::dirac(41, i).unwrap();
        let q = ActionDistribution::dirac(41, j).unwrap();
        let approx = sinkhorn_approx(&p, &q, &c, 1e-3, 200_000, 1e-8).unwrap();
        let target = (i as f64 - j as f64).abs();
        assert!((approx.distance - target).abs() <= 0.1);
    }
}

#[test]
fn sinkhorn_uniform_self_bias_bound() {
    let c = cost(41, GroundDistance::Absolute, 1);
    let u = ActionDistribution::uniform(41).unwrap();
    for &reg in &[1e-3, 1e-2, 0.5] {
        let approx = sinkhorn_approx(&u, &u, &c, reg, 200_000, 1e-9).unwrap();
        assert!(approx.distance <= reg * 41f64.ln());
    }
}

fn dist_strategy(n: usize) -> impl Strategy<Value = ActionDistribution> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], n)
        .prop_filter("nonzero", |w| w.iter().sum::<f64>() > 1e-6)
        .prop_map(|w| ActionDistribution::from_weights(&w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_solver_is_a_metric(p in dist_strategy(41), q in dist_strategy(41), r in dist_strategy(41)) {
        let c = cost(41, GroundDistance::Absolute, 1);
        let w = |a: &ActionDistribution, b: &ActionDistribution| wasserstein_exact(a, b, &c).unwrap().distance;
        prop_assert!(w(&p, &p).abs() <= 1e-12);
        prop_assert!((w(&p, &q) - w(&q, &p)).abs() <= 1e-9);
        prop_assert!(w(&p, &r) <= w(&p, &q) + w(&q, &r) + 1e-9);
    }

    #[test]
    fn closed_form_agrees_with_simplex(p in dist_strategy(41), q in dist_strategy(41)) {
        let c = cost(41, GroundDistance::Absolute, 1);
        let exact = wasserstein_exact(&p, &q, &c).unwrap().distance;
        let closed = wasserstein_1d_closed_form(&p, &q).unwrap();
        prop_assert!((exact - closed).abs() <= 1e-9);
        prop_assert!(exact.is_finite());
    }

    #[test]
    fn distribution_json_roundtrip(p in dist_strategy(17)) {
        let back = ActionDistribution::from_json(&p.to_json()).unwrap();
        for (a, b) in p.mass().iter().zip(back.mass()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
