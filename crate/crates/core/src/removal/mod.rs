//! Predictions with partial input, `f(x_S)`, under baseline, marginal and
//! conditional feature removal.

mod mask;
mod strategy;

pub use mask::{FeaturePartition, SubsetMask, MAX_EXACT_FEATURES};
pub use strategy::{evaluate_subset, MarginalSource, RemovalKind, RemovalMode, RemovalStrategy};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::Model;
use crate::numerics::{with_workers, Matrix, Rng};
use mask::check_enumerable;

/// The `2^d` subset predictions `v_S = f(x_S)`, indexed by [`SubsetMask`].
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionVector {
    d: usize,
    values: Vec<f64>,
}

impl PredictionVector {
    pub fn new(d: usize, values: Vec<f64>) -> Result<Self> {
        check_enumerable(d)?;
        if values.len() != 1 << d {
            return Err(Error::DimensionMismatch {
                expected: 1 << d,
                actual: values.len(),
                context: "prediction vector length",
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "prediction for subset {} is not finite",
                SubsetMask::new(i as u64)
            )));
        }
        Ok(Self { d, values })
    }

    /// Build from a cooperative game `S -> v(S)`.
    pub fn from_game(d: usize, game: impl Fn(SubsetMask) -> f64) -> Result<Self> {
        check_enumerable(d)?;
        Self::new(d, SubsetMask::all(d).map(game).collect())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, s: SubsetMask) -> f64 {
        self.values[s.index()]
    }

    pub fn full(&self) -> f64 {
        self.get(SubsetMask::full(self.d))
    }

    pub fn empty(&self) -> f64 {
        self.values[0]
    }
}

fn check_model(f: &(impl Model + ?Sized), x: &[f64], strat: &RemovalStrategy) -> Result<usize> {
    let d = x.len();
    for (expected, context) in [(f.dim(), "model input width"), (strat.dim(), "removal strategy")] {
        if expected != d {
            return Err(Error::DimensionMismatch {
                expected,
                actual: d,
                context,
            });
        }
    }
    Ok(d)
}

/// Evaluate `f(x_S)` for every subset.
///
/// Subset `S` draws from `rng.derive(S)`, so the result does not depend on
/// `workers` or on evaluation order.
pub fn evaluate_all_subsets<M: Model + ?Sized>(
    f: &M,
    x: &[f64],
    strat: &RemovalStrategy,
    rng: &Rng,
    workers: usize,
) -> Result<PredictionVector> {
    let d = check_model(f, x, strat)?;
    check_enumerable(d)?;
    if strat.kind() == RemovalKind::Baseline {
        // deterministic: a single batch of 2^d inputs
        let mut inputs = Matrix::zeros(1 << d, d);
        for s in SubsetMask::all(d) {
            let row = strat.impute(x, s, 1, &mut rng.derive(s.bits()))?;
            inputs.row_mut(s.index()).copy_from_slice(row.row(0));
        }
        let mut values = f.predict_batch(&inputs)?;
        values[(1 << d) - 1] = f.predict(x)?;
        return PredictionVector::new(d, values);
    }
    let values = with_workers(workers, || {
        (0..1u64 << d)
            .into_par_iter()
            .map(|bits| {
                let s = SubsetMask::new(bits);
                evaluate_subset(f, x, s, strat, &mut rng.derive(bits))
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    PredictionVector::new(d, values)
}

/// Group-level game: entry `T` is `f(x_{G_T})` with `G_T` the union of the
/// groups in `T`. Uses the same per-subset streams as
/// [`evaluate_all_subsets`] (keyed by the expanded feature mask).
pub fn evaluate_group_subsets<M: Model + ?Sized>(
    f: &M,
    x: &[f64],
    partition: &FeaturePartition,
    strat: &RemovalStrategy,
    rng: &Rng,
    workers: usize,
) -> Result<PredictionVector> {
    let d = check_model(f, x, strat)?;
    if partition.d() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: partition.d(),
            context: "feature partition",
        });
    }
    let g = partition.g();
    let values = with_workers(workers, || {
        (0..1u64 << g)
            .into_par_iter()
            .map(|bits| {
                let s = partition.expand(SubsetMask::new(bits));
                evaluate_subset(f, x, s, strat, &mut rng.derive(s.bits()))
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    PredictionVector::new(g, values)
}

/// `S -> f(x_S)` as a reusable oracle with the per-subset stream convention.
pub fn subset_oracle<'a, M: Model + ?Sized>(
    f: &'a M,
    x: &'a [f64],
    strat: &'a RemovalStrategy,
    rng: &'a Rng,
) -> impl Fn(SubsetMask) -> Result<f64> + Sync + 'a {
    move |s| evaluate_subset(f, x, s, strat, &mut rng.derive(s.bits()))
}

/// Samples per subset so that a Monte-Carlo average of predictions bounded
/// by `B` is within `epsilon` of its mean with probability `1 - delta`:
/// `ceil(2 B^2 ln(2 / delta) / epsilon^2)`, at least 1.
pub fn required_samples(bound: f64, epsilon: f64, delta: f64) -> Result<u64> {
    if !(bound >= 0.0 && bound.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "prediction bound must be finite and nonnegative, got {bound}"
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let m = (2.0 * bound * bound * (2.0 / delta).ln() / (epsilon * epsilon)).ceil();
    Ok((m as u64).max(1))
}
