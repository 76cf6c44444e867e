//! Data distributions: exact Gaussians, empirical datasets and the synthetic
//! logistic generator used by the experiments.

mod dataset;
mod gaussian;

pub use dataset::{load_csv, read_csv, Dataset};
pub use gaussian::{tv_gaussian_1d, Conditional, Conditioner, GaussianModel, PSD_CLAMP};

use crate::error::{Error, Result};
use crate::numerics::{dot, sigmoid, Rng};

/// Correlated Gaussian features with Bernoulli logistic labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub rho: f64,
    pub n: usize,
    pub beta: Vec<f64>,
}

impl SyntheticSpec {
    pub const DEFAULT_BETA: [f64; 4] = [5.0, 0.0, 3.0, 1.0];

    pub fn new(rho: f64, n: usize) -> Result<Self> {
        Self::with_beta(rho, n, Self::DEFAULT_BETA.to_vec())
    }

    pub fn with_beta(rho: f64, n: usize, beta: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidParameter(format!("rho must lie in [0, 1], got {rho}")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("sample size must be positive".into()));
        }
        if beta.len() < 2 {
            return Err(Error::InvalidParameter("need at least two features".into()));
        }
        Ok(Self { rho, n, beta })
    }

    /// Feature distribution: unit variances, correlation `rho` between the
    /// first two features, everything else independent.
    pub fn gaussian(&self) -> Result<GaussianModel> {
        GaussianModel::correlated_pair(self.beta.len(), self.rho)
    }
}

/// Draw features from [`SyntheticSpec::gaussian`] and labels from
/// `Bernoulli(sigmoid(beta . x))`.
pub fn generate_synthetic(spec: &SyntheticSpec, rng: &Rng) -> Result<Dataset> {
    let g = spec.gaussian()?;
    let rows = g.sample(spec.n, &mut rng.derive(0));
    let mut coin = rng.derive(1);
    let labels = (0..spec.n)
        .map(|i| {
            let p = sigmoid(dot(&spec.beta, rows.row(i)));
            if coin.uniform() < p {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Dataset::unnamed(rows, Some(labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_features_are_uncorrelated() {
        let ds = generate_synthetic(&SyntheticSpec::new(0.0, 10_000).unwrap(), &Rng::new(1, 0))
            .unwrap();
        let m = ds.column_means();
        for a in 0..4 {
            for b in (a + 1)..4 {
                let cov: f64 = (0..ds.n())
                    .map(|i| (ds.row(i)[a] - m[a]) * (ds.row(i)[b] - m[b]))
                    .sum::<f64>()
                    / ds.n() as f64;
                assert!(cov.abs() < 0.05, "cov({a},{b}) = {cov}");
            }
        }
    }

    #[test]
    fn perfect_correlation_duplicates_columns() {
        let ds = generate_synthetic(&SyntheticSpec::new(1.0, 500).unwrap(), &Rng::new(2, 0))
            .unwrap();
        for i in 0..ds.n() {
            assert!((ds.row(i)[0] - ds.row(i)[1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_coefficients_give_fair_labels() {
        let spec = SyntheticSpec::with_beta(0.5, 10_000, vec![0.0; 4]).unwrap();
        let ds = generate_synthetic(&spec, &Rng::new(3, 0)).unwrap();
        let mean = ds.labels().unwrap().iter().sum::<f64>() / ds.n() as f64;
        assert!((mean - 0.5).abs() < 0.02);
    }

    #[test]
    fn spec_validation() {
        assert!(SyntheticSpec::new(1.5, 10).is_err());
        assert!(SyntheticSpec::new(0.5, 0).is_err());
    }
}
