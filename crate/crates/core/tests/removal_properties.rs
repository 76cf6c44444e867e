use std::sync::Arc;

use proptest::prelude::*;
use removal_attrib::data::{Dataset, GaussianModel};
use removal_attrib::models::{glm_lipschitz, GeneralizedLinearModel, Link, Model};
use removal_attrib::numerics::{Matrix, Rng, SymMatrix};
use removal_attrib::removal::{
    evaluate_all_subsets, evaluate_subset, required_samples, RemovalMode, RemovalStrategy, SubsetMask,
};

fn random_covariance(d: usize, rng: &mut Rng) -> SymMatrix {
    let a: Vec<Vec<f64>> = (0..d).map(|_| rng.normal_vec(d)).collect();
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let dot: f64 = (0..d).map(|k| a[i][k] * a[j][k]).sum();
                    dot / d as f64 + if i == j { 0.5 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    SymMatrix::from_rows(&rows).unwrap()
}

fn kept_distance(x: &[f64], y: &[f64], s: SubsetMask) -> f64 {
    s.features().iter().map(|&i| (x[i] - y[i]).powi(2)).sum::<f64>().sqrt()
}

fn strategies(d: usize, rng: &mut Rng) -> Vec<RemovalStrategy> {
    let rows = Matrix::from_rows(&(0..12).map(|_| rng.normal_vec(d)).collect::<Vec<_>>()).unwrap();
    let data = Dataset::unnamed(rows, None).unwrap();
    let gauss = GaussianModel::new(vec![0.0; d], random_covariance(d, rng)).unwrap();
    vec![
        RemovalStrategy::baseline(rng.normal_vec(d)),
        RemovalStrategy::marginal_dataset(Arc::new(data), RemovalMode::Exact).unwrap(),
        RemovalStrategy::marginal_gaussian(gauss, RemovalMode::Exact).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn baseline_and_marginal_inherit_lipschitz_constant(seed in any::<u64>(), d in 1usize..=6, sigmoid in any::<bool>()) {
        let mut rng = Rng::new(seed, 0);
        let link = if sigmoid { Link::Sigmoid } else { Link::Identity };
        let f = GeneralizedLinearModel::new(rng.normal_vec(d), rng.normal(), link);
        let l = glm_lipschitz(&f);
        let x = rng.normal_vec(d);
        let y: Vec<f64> = x.iter().map(|v| v + 0.5 * rng.normal()).collect();
        for strat in strategies(d, &mut rng) {
            for s in SubsetMask::all(d) {
                let fx = evaluate_subset(&f, &x, s, &strat, &mut Rng::new(1, 0))?;
                let fy = evaluate_subset(&f, &y, s, &strat, &mut Rng::new(1, 0))?;
                prop_assert!((fx - fy).abs() <= l * kept_distance(&x, &y, s) + 1e-12);
            }
        }
    }

    #[test]
    fn conditional_removal_within_l_plus_2bm(seed in any::<u64>(), d in 2usize..=5) {
        let mut rng = Rng::new(seed, 0);
        let f = GeneralizedLinearModel::new(rng.normal_vec(d), rng.normal(), Link::Sigmoid);
        let gauss = GaussianModel::new(vec![0.0; d], random_covariance(d, &mut rng)).unwrap();
        let constant = glm_lipschitz(&f) + 2.0 * f.output_bound().unwrap() * gauss.tv_constant();
        prop_assert!(constant.is_finite());
        let strat = RemovalStrategy::conditional(gauss, RemovalMode::Exact)?;
        let x = rng.normal_vec(d);
        let y: Vec<f64> = x.iter().map(|v| v + rng.normal()).collect();
        for s in SubsetMask::all(d) {
            let fx = evaluate_subset(&f, &x, s, &strat, &mut Rng::new(1, 0))?;
            let fy = evaluate_subset(&f, &y, s, &strat, &mut Rng::new(1, 0))?;
            prop_assert!((fx - fy).abs() <= constant * kept_distance(&x, &y, s) + 1e-9);
        }
    }

    #[test]
    fn equal_seeds_give_equal_vectors(seed in any::<u64>(), d in 1usize..=5, workers in 1usize..=4) {
        let mut rng = Rng::new(seed, 0);
        let f = GeneralizedLinearModel::new(rng.normal_vec(d), 0.0, Link::Sigmoid);
        let x = rng.normal_vec(d);
        let gauss = GaussianModel::new(vec![0.0; d], random_covariance(d, &mut rng)).unwrap();
        let strat = RemovalStrategy::conditional(gauss, RemovalMode::Sampled(20))?;
        let stream = Rng::new(seed, 9);
        let a = evaluate_all_subsets(&f, &x, &strat, &stream, 1)?;
        let b = evaluate_all_subsets(&f, &x, &strat, &stream, workers)?;
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn required_samples_scale_with_epsilon(b in 0.1f64..10.0, eps in 0.001f64..1.0, delta in 0.001f64..0.5) {
        let m = required_samples(b, eps, delta)? as f64;
        let m2 = required_samples(b, 2.0 * eps, delta)? as f64;
        let exact = 2.0 * b * b * (2.0 / delta).ln() / (eps * eps);
        prop_assert!(m >= exact && m < exact + 1.0);
        prop_assert!(m2 <= m);
    }
}

#[test]
fn hoeffding_coverage_for_a_bounded_model() {
    let (b, eps, delta) = (1.0, 0.1, 0.05);
    let m = required_samples(b, eps, delta).unwrap() as usize;
    let d = 3;
    let f = GeneralizedLinearModel::new(vec![2.0, -3.0, 1.0], 0.0, Link::Sigmoid);
    assert!(f.output_bound().unwrap() <= b);
    let gauss = GaussianModel::correlated_pair(d, 0.8).unwrap();
    let exact = RemovalStrategy::conditional(gauss.clone(), RemovalMode::Exact).unwrap();
    let sampled = RemovalStrategy::conditional(gauss, RemovalMode::Sampled(m)).unwrap();
    let x = [0.5, 0.4, -1.0];
    let s = SubsetMask::from_features(&[0]);
    let truth = evaluate_subset(&f, &x, s, &exact, &mut Rng::new(0, 0)).unwrap();
    let trials = 2000;
    let misses = (0..trials)
        .filter(|&t| {
            let est = evaluate_subset(&f, &x, s, &sampled, &mut Rng::new(3, t)).unwrap();
            (est - truth).abs() > eps
        })
        .count();
    assert!(misses as f64 / trials as f64 <= delta + 3.0 * (delta / trials as f64).sqrt());
}

#[test]
fn hand_expanded_linear_game() {
    let f = GeneralizedLinearModel::new(vec![1.5, -2.0, 0.5], 0.25, Link::Identity);
    let x = [2.0, 1.0, -4.0];
    let v = evaluate_all_subsets(&f, &x, &RemovalStrategy::baseline(vec![0.0; 3]), &Rng::new(0, 0), 1).unwrap();
    let expected = [0.25, 3.25, -1.75, 1.25, -1.75, 1.25, -3.75, -0.75];
    for (got, want) in v.values().iter().zip(expected) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}
