use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wbr_core::info::{
    entropy, format_extended, info_cost, kl_divergence, kl_star, make_prior, parse_extended,
    smooth_prior, wasserstein_cost, InfoCostKind, OtConfig, PriorKind,
};
use wbr_core::ot::{ActionDistribution, ActionSpace};

fn random_dist(rng: &mut impl Rng, n: usize, sparsity: f64) -> ActionDistribution {
    loop {
        let w: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(sparsity) { 0.0 } else { rng.random::<f64>() })
            .collect();
        if w.iter().sum::<f64>() > 0.0 {
            return ActionDistribution::from_weights(&w).unwrap();
        }
    }
}

fn plain_entropy(m: &[f64]) -> f64 {
    m.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

#[test]
fn kl_against_uniform_is_log_size_minus_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let uniform = ActionDistribution::uniform(41).unwrap();
    for _ in 0..100 {
        let p = random_dist(&mut rng, 41, 0.3);
        let kl = kl_divergence(&p, &uniform).unwrap();
        let expected = 41f64.ln() - plain_entropy(p.mass());
        assert!((kl - expected).abs() <= 1e-9, "{kl} vs {expected}");
    }
    let h: f64 = entropy(&uniform);
    assert!((h - 41f64.ln()).abs() <= 1e-9);
    assert!((h - 3.71357).abs() < 1e-5);
}

#[test]
fn entropy_reference_values() {
    let half = ActionDistribution::new(vec![0.5, 0.5, 0.0]).unwrap();
    assert!((entropy(&half) - 0.69315).abs() < 1e-5);
    for i in [0, 17, 40] {
        assert_eq!(entropy(&ActionDistribution::dirac(41, i).unwrap()), 0.0);
    }
}

#[test]
fn kl_star_dirac_example() {
    let p = ActionDistribution::dirac(41, 5).unwrap();
    let q = ActionDistribution::dirac(41, 0).unwrap();
    let eps: f64 = 1e-6;
    let smoothed_at_5 = eps / (1.0 + 40.0 * eps);
    let expected = (1.0 / smoothed_at_5).ln();
    assert!((kl_star(&p, &q, eps).unwrap() - expected).abs() < 1e-9);
    assert_eq!(kl_divergence(&p, &q).unwrap(), f64::INFINITY);
    assert_eq!(wasserstein_cost(&p, &q, &OtConfig::default()).unwrap(), 5.0);
}

#[test]
fn kl_star_converges_to_kl_for_positive_priors() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let p = random_dist(&mut rng, 41, 0.5);
        let q = random_dist(&mut rng, 41, 0.0);
        let kl = kl_divergence(&p, &q).unwrap();
        let floor = q.mass().iter().copied().fold(f64::INFINITY, f64::min);
        let mut last_gap = f64::INFINITY;
        for eps in [1e-4, 1e-6, 1e-8] {
            let gap = (kl_star(&p, &q, eps).unwrap() - kl).abs();
            assert!(gap <= last_gap + 1e-12);
            last_gap = gap;
            if eps < floor {
                assert!(gap <= 1e-6, "eps {eps} gap {gap}");
            }
        }
        assert!(last_gap <= 1e-6);
    }
}

#[test]
fn kl_star_is_identity_when_epsilon_below_prior() {
    let q = ActionDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
    assert_eq!(smooth_prior(&q, 0.1).unwrap(), q);
    assert_eq!(kl_star(&q, &q, 0.1).unwrap(), 0.0);
    let u = ActionDistribution::uniform(41).unwrap();
    for eps in [1e-9, 1e-3, 0.02] {
        assert!(kl_star(&u, &u, eps).unwrap().abs() < 1e-15);
    }
    assert!(kl_star(&q, &q, 1.0 / 3.0).is_err());
    assert!(kl_star(&q, &q, 0.0).is_err());
}

#[test]
fn partial_support_priors_make_kl_infinite_but_transport_finite() {
    let space = ActionSpace::new(41).unwrap();
    let history = [10usize, 10, 12, 20];
    let historical = make_prior(&PriorKind::Historical, &space, Some(&history)).unwrap();
    let dirac = make_prior(&PriorKind::OptimalDirac(0), &space, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let p = random_dist(&mut rng, 41, 0.2);
        for q in [&historical, &dirac] {
            let off_support = p.support().iter().any(|&i| q.get(i) == 0.0);
            let kl = kl_divergence(&p, q).unwrap();
            assert_eq!(kl.is_infinite(), off_support);
            assert!(wasserstein_cost(&p, q, &OtConfig::default()).unwrap().is_finite());
            let sq: OtConfig = "abs:2".parse().unwrap();
            assert!(wasserstein_cost(&p, q, &sq).unwrap().is_finite());
            assert!(kl_star(&p, q, 1e-6).unwrap().is_finite());
        }
    }
}

#[test]
fn prior_constructors() {
    let space = ActionSpace::new(41).unwrap();
    let u = make_prior(&PriorKind::Uniform, &space, None).unwrap();
    assert!(u.mass().iter().all(|&m| m == 1.0 / 41.0));
    let d = make_prior(&"dirac:0".parse().unwrap(), &space, None).unwrap();
    assert_eq!(d.get(0), 1.0);
    let h = make_prior(&PriorKind::Historical, &space, Some(&[10, 10, 20])).unwrap();
    assert!((h.get(10) - 2.0 / 3.0).abs() < 1e-15);
    assert!(make_prior(&PriorKind::Historical, &space, Some(&[])).is_err());
    assert!(make_prior(&PriorKind::Historical, &space, None).is_err());
}

#[test]
fn cli_style_names_parse() {
    for s in ["entropy", "kl", "klstar:1e-6", "wasserstein:abs:1", "wasserstein:abs:2:root", "wasserstein:fixed:7"] {
        let kind: InfoCostKind = s.parse().unwrap();
        assert_eq!(kind.to_string().parse::<InfoCostKind>().unwrap(), kind);
    }
    for s in ["uniform", "dirac:0", "historical", "custom:0.5,0.5"] {
        let kind: PriorKind = s.parse().unwrap();
        assert_eq!(kind.to_string().parse::<PriorKind>().unwrap(), kind);
    }
    assert!("wasserstein:abs:0".parse::<InfoCostKind>().is_err());
    assert!("kl:2".parse::<InfoCostKind>().is_err());
    assert_eq!(format_extended(f64::INFINITY), "inf");
    assert_eq!(parse_extended("inf").unwrap(), f64::INFINITY);
}

fn dist(n: usize) -> impl Strategy<Value = ActionDistribution> {
    proptest::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], n)
        .prop_filter("positive total", |w| w.iter().sum::<f64>() > 1e-6)
        .prop_map(|w| ActionDistribution::from_weights(&w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn costs_are_nonnegative_and_vanish_on_identity(p in dist(12), q in dist(12)) {
        let kinds: [InfoCostKind; 5] = [
            "entropy".parse().unwrap(),
            "kl".parse().unwrap(),
            "klstar:1e-6".parse().unwrap(),
            "wasserstein".parse().unwrap(),
            "wasserstein:abs:2".parse().unwrap(),
        ];
        for kind in &kinds {
            prop_assert!(info_cost(kind, &p, &q).unwrap() >= 0.0);
        }
        prop_assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        prop_assert_eq!(wasserstein_cost(&p, &p, &OtConfig::default()).unwrap(), 0.0);
        let h = entropy(&p);
        prop_assert!(h <= 12f64.ln() + 1e-12);
        prop_assert_eq!(h == 0.0, p.support().len() == 1);
    }

    #[test]
    fn entropy_ignores_the_prior(p in dist(9), q1 in dist(9), q2 in dist(9)) {
        let kind = InfoCostKind::Entropy;
        prop_assert_eq!(info_cost(&kind, &p, &q1).unwrap(), info_cost(&kind, &p, &q2).unwrap());
    }

    #[test]
    fn distinct_distributions_have_positive_cost(p in dist(8), q in dist(8)) {
        prop_assume!(p.total_variation(&q).unwrap() > 1e-6);
        prop_assert!(kl_divergence(&p, &q).unwrap() > 0.0);
        prop_assert!(wasserstein_cost(&p, &q, &OtConfig::default()).unwrap() > 0.0);
    }
}
