//! Prediction functions `f: R^d -> R` and the metadata the certificates need.

mod bridge;
mod glm;
mod gradients;
mod mlp;

pub use bridge::ExternalModel;
pub use glm::{glm_lipschitz, train_glm, GeneralizedLinearModel, Link};
pub use gradients::{grad_attributions, GradMethod};
pub use mlp::{randomize_cascading, train_mlp, Layer, MlpModel, OutputActivation};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// A model queried by the removal rules.
///
/// Only [`Model::predict_batch`] is required. Implementations must be
/// deterministic and safe to call from several threads at once.
pub trait Model: Send + Sync {
    fn dim(&self) -> usize;

    /// One prediction per row of `inputs` (`n x d`).
    fn predict_batch(&self, inputs: &Matrix) -> Result<Vec<f64>>;

    fn predict(&self, x: &[f64]) -> Result<f64> {
        let m = Matrix::from_vec(1, x.len(), x.to_vec())?;
        Ok(self.predict_batch(&m)?[0])
    }

    fn input_gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Ordered parameter blocks, input side first.
    fn layers(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }

    /// Global Lipschitz constant `L` (an upper bound), when known.
    fn lipschitz_constant(&self) -> Option<f64> {
        None
    }

    /// Bound `B` with `|f(x)| <= B` everywhere, when known.
    fn output_bound(&self) -> Option<f64> {
        None
    }

    /// Generalized-linear structure, which enables exact Gaussian removal.
    fn as_glm(&self) -> Option<&GeneralizedLinearModel> {
        None
    }
}

macro_rules! forward_model {
    ($($ty:ty),*) => {$(
        impl<M: Model + ?Sized> Model for $ty {
            fn dim(&self) -> usize { (**self).dim() }
            fn predict_batch(&self, inputs: &Matrix) -> Result<Vec<f64>> { (**self).predict_batch(inputs) }
            fn predict(&self, x: &[f64]) -> Result<f64> { (**self).predict(x) }
            fn input_gradient(&self, x: &[f64]) -> Option<Vec<f64>> { (**self).input_gradient(x) }
            fn layers(&self) -> Vec<Vec<f64>> { (**self).layers() }
            fn lipschitz_constant(&self) -> Option<f64> { (**self).lipschitz_constant() }
            fn output_bound(&self) -> Option<f64> { (**self).output_bound() }
            fn as_glm(&self) -> Option<&GeneralizedLinearModel> { (**self).as_glm() }
        }
    )*};
}

forward_model!(&M, Box<M>, std::sync::Arc<M>);

/// A model backed by a plain function. Carries no metadata.
pub struct FnModel<F> {
    dim: usize,
    f: F,
}

impl<F> FnModel<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Model for FnModel<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict_batch(&self, inputs: &Matrix) -> Result<Vec<f64>> {
        check_input_width(self.dim, inputs.cols())?;
        Ok((0..inputs.rows()).map(|i| (self.f)(inputs.row(i))).collect())
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        check_input_width(self.dim, x.len())?;
        Ok((self.f)(x))
    }
}

pub(crate) fn check_input_width(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            expected,
            actual,
            context: "model input width",
        });
    }
    Ok(())
}

/// Hyperparameters shared by the trainers.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    learning_rate: f64,
    epochs: usize,
    weight_decay: f64,
    batch_size: usize,
    seed: u64,
}

impl TrainConfig {
    pub fn new(
        learning_rate: f64,
        epochs: usize,
        weight_decay: f64,
        batch_size: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be positive, got {learning_rate}"
            )));
        }
        if !(weight_decay >= 0.0 && weight_decay.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weight decay must be nonnegative, got {weight_decay}"
            )));
        }
        if batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be positive".into()));
        }
        Ok(Self {
            learning_rate,
            epochs,
            weight_decay,
            batch_size,
            seed,
        })
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }
    pub fn epochs(&self) -> usize {
        self.epochs
    }
    pub fn weight_decay(&self) -> f64 {
        self.weight_decay
    }
    pub fn batch_size(&self) -> usize {
        self.batch_size
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_weight_decay(&self, weight_decay: f64) -> Result<Self> {
        Self::new(
            self.learning_rate,
            self.epochs,
            weight_decay,
            self.batch_size,
            self.seed,
        )
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn train_config_validation() {
        assert!(TrainConfig::new(0.1, 10, 0.0, 8, 1).is_ok());
        assert!(TrainConfig::new(0.0, 10, 0.0, 8, 1).is_err());
        assert!(TrainConfig::new(0.1, 10, -1.0, 8, 1).is_err());
        assert!(TrainConfig::new(0.1, 10, 0.0, 0, 1).is_err());
    }

    #[test]
    fn fn_model_checks_width() {
        let m = FnModel::new(2, |x: &[f64]| x[0] + x[1]);
        assert_eq!(m.predict(&[1.0, 2.0]).unwrap(), 3.0);
        assert!(m.predict(&[1.0]).is_err());
    }
}
