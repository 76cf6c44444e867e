mod common;

use common::{brute_banzhaf, brute_shapley, max_abs_diff, random_ordering, random_simplex};
use proptest::prelude::*;
use removal_attrib::models::{FnModel, GeneralizedLinearModel, Link};
use removal_attrib::numerics::{Matrix, Rng};
use removal_attrib::removal::{evaluate_all_subsets, subset_oracle, PredictionVector, RemovalStrategy};
use removal_attrib::summary::{
    attribute, attribute_mc, build_operator, build_random_order, build_semivalue, check_axioms, CardinalityWeights,
    OrderDistribution, SummaryKind, SummaryOperator,
};

fn game(d: usize, rng: &mut Rng) -> Vec<f64> {
    (0..1usize << d).map(|_| rng.normal()).collect()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shapley_matches_permutation_average(seed in any::<u64>(), d in 1usize..=6) {
        let g = game(d, &mut Rng::new(seed, 0));
        let phi = attribute(&build_operator(&SummaryKind::Shapley, d)?, &PredictionVector::new(d, g.clone())?)?;
        prop_assert!(max_abs_diff(&phi, &brute_shapley(d, &g)) <= 1e-10);
    }

    #[test]
    fn banzhaf_matches_subset_average(seed in any::<u64>(), d in 1usize..=6) {
        let g = game(d, &mut Rng::new(seed, 0));
        let phi = attribute(&build_operator(&SummaryKind::Banzhaf, d)?, &PredictionVector::new(d, g.clone())?)?;
        prop_assert!(max_abs_diff(&phi, &brute_banzhaf(d, &g)) <= 1e-10);
    }

    #[test]
    fn operator_inequalities(seed in any::<u64>(), d in 1usize..=6, which in 0usize..4) {
        let mut rng = Rng::new(seed, 0);
        let op = match which {
            0 => build_operator(&SummaryKind::Rise, d)?,
            1 => build_semivalue(&CardinalityWeights::new(random_simplex(d, &mut rng))?, d)?,
            2 => build_operator(&SummaryKind::Shapley, d)?,
            _ => {
                let entries: Vec<f64> = (0..d << d).map(|_| rng.normal()).collect();
                SummaryOperator::custom(Matrix::from_vec(d, 1 << d, entries)?)?
            }
        };
        let norms = op.norms()?;
        let v = PredictionVector::new(d, game(d, &mut rng))?;
        let w = PredictionVector::new(d, game(d, &mut rng))?;
        let a = attribute(&op, &v)?;
        let b = attribute(&op, &w)?;
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let input: Vec<f64> = v.values().iter().zip(w.values()).map(|(x, y)| x - y).collect();
        let sup = input.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(l2(&diff) <= norms.spectral * l2(&input) * (1.0 + 1e-12) + 1e-12);
        prop_assert!(l2(&diff) <= norms.one_inf * sup * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn probabilistic_values_have_one_inf_two_root_d(seed in any::<u64>(), d in 1usize..=6) {
        let mut rng = Rng::new(seed, 0);
        let semi = build_semivalue(&CardinalityWeights::new(random_simplex(d, &mut rng))?, d)?;
        let k = 1 + rng.below(4) as usize;
        let support = random_simplex(k, &mut rng).into_iter().map(|p| (random_ordering(d, &mut rng), p)).collect();
        let order = build_random_order(&OrderDistribution::new(d, support)?, d)?;
        let target = 2.0 * (d as f64).sqrt();
        prop_assert!((semi.norms()?.one_inf - target).abs() <= 1e-9);
        prop_assert!((order.norms()?.one_inf - target).abs() <= 1e-9);
        prop_assert!(check_axioms(&order).efficiency);
        prop_assert!(check_axioms(&semi).symmetry);
    }

    #[test]
    fn semivalue_spectral_bracket(seed in any::<u64>(), d in 1usize..=8) {
        let alpha = CardinalityWeights::new(random_simplex(d, &mut Rng::new(seed, 0)))?;
        let s = build_semivalue(&alpha, d)?.norms()?.spectral;
        prop_assert!(s >= 0.5f64.powf(d as f64 / 2.0 - 1.0) - 1e-9);
        prop_assert!(s <= (d as f64 + 1.0).sqrt() + 1e-9);
    }

    #[test]
    fn random_order_spectral_bracket(seed in any::<u64>(), d in 1usize..=5) {
        let mut rng = Rng::new(seed, 0);
        let k = 1 + rng.below(8) as usize;
        let support = random_simplex(k, &mut rng).into_iter().map(|p| (random_ordering(d, &mut rng), p)).collect();
        let s = build_random_order(&OrderDistribution::new(d, support)?, d)?.norms()?.spectral;
        let upper = (2.0 + 2.0 * (std::f64::consts::PI / (d as f64 + 1.0)).cos()).sqrt();
        prop_assert!(s >= (2.0 / d as f64).sqrt() - 1e-9);
        prop_assert!(s <= upper + 1e-9);
    }

    #[test]
    fn weak_implementation_invariance(seed in any::<u64>(), d in 1usize..=5) {
        let mut rng = Rng::new(seed, 0);
        let glm = GeneralizedLinearModel::new(rng.normal_vec(d), rng.normal(), Link::Sigmoid);
        let beta = glm.coefficients.clone();
        let b0 = glm.intercept;
        let wrapped = FnModel::new(d, move |x: &[f64]| {
            let t: f64 = b0 + x.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
            1.0 / (1.0 + (-t).exp())
        });
        let x = rng.normal_vec(d);
        let strat = RemovalStrategy::baseline(rng.normal_vec(d));
        let v = evaluate_all_subsets(&glm, &x, &strat, &Rng::new(0, 0), 1)?;
        let w = evaluate_all_subsets(&wrapped, &x, &strat, &Rng::new(0, 0), 1)?;
        prop_assert!(max_abs_diff(v.values(), w.values()) <= 1e-15);
        let op = build_operator(&SummaryKind::Shapley, d)?;
        prop_assert!(max_abs_diff(&attribute(&op, &v)?, &attribute(&op, &w)?) <= 1e-15);
    }
}

#[test]
fn monte_carlo_agrees_with_dense_operators() {
    let d = 8;
    let mut rng = Rng::new(17, 0);
    let f = GeneralizedLinearModel::new(rng.normal_vec(d), 0.1, Link::Sigmoid);
    let x = rng.normal_vec(d);
    let strat = RemovalStrategy::baseline(vec![0.0; d]);
    let stream = Rng::new(0, 0);
    let v = evaluate_all_subsets(&f, &x, &strat, &stream, 1).unwrap();
    let oracle = subset_oracle(&f, &x, &strat, &stream);
    for kind in [SummaryKind::Shapley, SummaryKind::Banzhaf] {
        let exact = attribute(&build_operator(&kind, d).unwrap(), &v).unwrap();
        let mc = attribute_mc(&kind, &oracle, d, 100_000, &Rng::new(5, 0), 1).unwrap();
        assert!(max_abs_diff(&exact, &mc) <= 0.02, "{kind}: {exact:?} vs {mc:?}");
    }
}
