//! Gradient-based attributions, used as references in sanity checks.

use super::Model;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum GradMethod {
    Vanilla,
    GradTimesInput,
    /// Left Riemann sum with `steps` points on the path from `baseline` to `x`.
    IntegratedGradients { steps: usize, baseline: Vec<f64> },
}

pub fn grad_attributions<M: Model + ?Sized>(
    m: &M,
    x: &[f64],
    method: &GradMethod,
) -> Result<Vec<f64>> {
    let grad = |p: &[f64]| {
        m.input_gradient(p)
            .ok_or(Error::MissingCapability("input gradients"))
    };
    match method {
        GradMethod::Vanilla => grad(x),
        GradMethod::GradTimesInput => Ok(grad(x)?.iter().zip(x).map(|(g, v)| g * v).collect()),
        GradMethod::IntegratedGradients { steps, baseline } => {
            if *steps == 0 {
                return Err(Error::InvalidParameter(
                    "integrated gradients need at least one step".into(),
                ));
            }
            if baseline.len() != x.len() {
                return Err(Error::DimensionMismatch {
                    expected: x.len(),
                    actual: baseline.len(),
                    context: "integrated gradients baseline",
                });
            }
            let mut total = vec![0.0; x.len()];
            let mut point = vec![0.0; x.len()];
            for k in 0..*steps {
                let t = k as f64 / *steps as f64;
                for j in 0..x.len() {
                    point[j] = baseline[j] + t * (x[j] - baseline[j]);
                }
                for (acc, g) in total.iter_mut().zip(grad(&point)?) {
                    *acc += g;
                }
            }
            Ok(total
                .iter()
                .zip(x.iter().zip(baseline))
                .map(|(g, (xi, bi))| g / *steps as f64 * (xi - bi))
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{FnModel, GeneralizedLinearModel, Link, MlpModel, OutputActivation};
    use crate::numerics::Rng;

    #[test]
    fn linear_model_gradients() {
        let beta = vec![2.0, -1.0, 0.5];
        let m = GeneralizedLinearModel::new(beta.clone(), 0.7, Link::Identity);
        let x = [1.0, 3.0, -2.0];
        assert_eq!(grad_attributions(&m, &x, &GradMethod::Vanilla).unwrap(), beta);
        let zero = grad_attributions(&m, &[0.0; 3], &GradMethod::GradTimesInput).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        let b = vec![0.5, 0.5, 0.5];
        for steps in [1, 3, 17] {
            let ig = grad_attributions(
                &m,
                &x,
                &GradMethod::IntegratedGradients {
                    steps,
                    baseline: b.clone(),
                },
            )
            .unwrap();
            for j in 0..3 {
                assert!((ig[j] - beta[j] * (x[j] - b[j])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn missing_gradient_capability() {
        let m = FnModel::new(2, |x: &[f64]| x[0]);
        assert_eq!(
            grad_attributions(&m, &[1.0, 2.0], &GradMethod::Vanilla),
            Err(Error::MissingCapability("input gradients"))
        );
    }

    #[test]
    fn integrated_gradients_completeness() {
        for seed in 0..8 {
            let m = MlpModel::init(&[3, 8, 8, 1], OutputActivation::Sigmoid, &Rng::new(seed, 0))
                .unwrap();
            let mut rng = Rng::new(seed, 3);
            let x: Vec<f64> = rng.normal_vec(3).iter().map(|v| 2.0 * v).collect();
            let b = vec![0.0; 3];
            let gap = m.predict(&x).unwrap() - m.predict(&b).unwrap();
            if gap.abs() < 1e-3 {
                continue;
            }
            let ig = grad_attributions(
                &m,
                &x,
                &GradMethod::IntegratedGradients {
                    steps: 2048,
                    baseline: b,
                },
            )
            .unwrap();
            let sum: f64 = ig.iter().sum();
            assert!((sum - gap).abs() <= 1e-3 * gap.abs(), "seed {seed}: {sum} vs {gap}");
        }
    }
}
