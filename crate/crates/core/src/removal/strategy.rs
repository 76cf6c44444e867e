use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use super::mask::SubsetMask;
use crate::data::{Conditioner, Dataset, GaussianModel};
use crate::error::{Error, Result};
use crate::models::{Link, Model};
use crate::numerics::{dot, logistic_normal_mean, Matrix, Rng};

/// Which family of removal rule a strategy belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RemovalKind {
    Baseline,
    Marginal,
    Conditional,
}

impl RemovalKind {
    pub const ALL: [RemovalKind; 3] = [Self::Baseline, Self::Marginal, Self::Conditional];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::Marginal => "marginal",
            Self::Conditional => "conditional",
        }
    }
}

impl fmt::Display for RemovalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RemovalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Self::Baseline),
            "marginal" => Ok(Self::Marginal),
            "conditional" => Ok(Self::Conditional),
            other => Err(Error::InvalidParameter(format!(
                "unknown removal kind {other:?} (expected baseline, marginal or conditional)"
            ))),
        }
    }
}

/// How the average over removed features is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemovalMode {
    /// Every dataset row, or closed form for generalized linear models under
    /// a Gaussian.
    Exact,
    /// Mean over `m` independent draws.
    Sampled(usize),
}

#[derive(Debug, Clone)]
pub enum MarginalSource {
    Dataset(Arc<Dataset>),
    Gaussian(GaussianModel),
}

#[derive(Debug, Clone)]
enum Rule {
    Baseline(Vec<f64>),
    Marginal {
        source: MarginalSource,
        mode: RemovalMode,
    },
    Conditional {
        gaussian: GaussianModel,
        mode: RemovalMode,
    },
}

// Gaussian imputation for one subset: the removed features, and a
// conditioner whose observed set is either S (conditional) or empty
// (marginal, set up on the marginal of the removed features).
#[derive(Debug)]
struct Imputer {
    hidden: Vec<usize>,
    conditional: bool,
    cond: Conditioner,
}

impl Imputer {
    fn mean(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.conditional {
            self.cond.conditional_mean_from(x)
        } else {
            self.cond.conditional_mean(&[])
        }
    }
}

const CACHE_MAX_FEATURES: usize = 16;

/// The distribution `q(x_removed)` used to fill in removed features.
///
/// Gaussian rules cache their per-subset conditioning, so a strategy should
/// be reused across explicands.
pub struct RemovalStrategy {
    rule: Rule,
    cache: OnceLock<Vec<OnceLock<Arc<Imputer>>>>,
}

impl Clone for RemovalStrategy {
    fn clone(&self) -> Self {
        Self::from_rule(self.rule.clone())
    }
}

impl fmt::Debug for RemovalStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RemovalStrategy").field("rule", &self.rule).finish()
    }
}

fn check_mode(mode: RemovalMode) -> Result<()> {
    if mode == RemovalMode::Sampled(0) {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    Ok(())
}

impl RemovalStrategy {
    fn from_rule(rule: Rule) -> Self {
        Self {
            rule,
            cache: OnceLock::new(),
        }
    }

    /// Removed features take the values in `b`.
    pub fn baseline(b: Vec<f64>) -> Self {
        Self::from_rule(Rule::Baseline(b))
    }

    /// Removed features are averaged over rows of `data`.
    pub fn marginal_dataset(data: impl Into<Arc<Dataset>>, mode: RemovalMode) -> Result<Self> {
        check_mode(mode)?;
        let data = data.into();
        if data.n() == 0 {
            return Err(Error::NoData);
        }
        Ok(Self::from_rule(Rule::Marginal {
            source: MarginalSource::Dataset(data),
            mode,
        }))
    }

    /// Removed features are averaged over their Gaussian marginal.
    pub fn marginal_gaussian(g: GaussianModel, mode: RemovalMode) -> Result<Self> {
        check_mode(mode)?;
        Ok(Self::from_rule(Rule::Marginal {
            source: MarginalSource::Gaussian(g),
            mode,
        }))
    }

    /// Removed features are averaged over their Gaussian conditional given
    /// the kept ones.
    pub fn conditional(g: GaussianModel, mode: RemovalMode) -> Result<Self> {
        check_mode(mode)?;
        Ok(Self::from_rule(Rule::Conditional { gaussian: g, mode }))
    }

    pub fn kind(&self) -> RemovalKind {
        match self.rule {
            Rule::Baseline(_) => RemovalKind::Baseline,
            Rule::Marginal { .. } => RemovalKind::Marginal,
            Rule::Conditional { .. } => RemovalKind::Conditional,
        }
    }

    pub fn mode(&self) -> RemovalMode {
        match self.rule {
            Rule::Baseline(_) => RemovalMode::Exact,
            Rule::Marginal { mode, .. } | Rule::Conditional { mode, .. } => mode,
        }
    }

    /// Number of features the strategy is defined over.
    pub fn dim(&self) -> usize {
        match &self.rule {
            Rule::Baseline(b) => b.len(),
            Rule::Marginal {
                source: MarginalSource::Dataset(ds),
                ..
            } => ds.d(),
            Rule::Marginal {
                source: MarginalSource::Gaussian(g),
                ..
            }
            | Rule::Conditional { gaussian: g, .. } => g.dim(),
        }
    }

    /// Same distribution with a different averaging mode (baseline is unchanged).
    pub fn with_mode(&self, mode: RemovalMode) -> Result<Self> {
        check_mode(mode)?;
        let rule = match &self.rule {
            Rule::Baseline(b) => Rule::Baseline(b.clone()),
            Rule::Marginal { source, .. } => Rule::Marginal {
                source: source.clone(),
                mode,
            },
            Rule::Conditional { gaussian, .. } => Rule::Conditional {
                gaussian: gaussian.clone(),
                mode,
            },
        };
        Ok(Self::from_rule(rule))
    }

    /// The Gaussian behind a Gaussian rule, if any.
    pub fn gaussian(&self) -> Option<&GaussianModel> {
        match &self.rule {
            Rule::Marginal {
                source: MarginalSource::Gaussian(g),
                ..
            }
            | Rule::Conditional { gaussian: g, .. } => Some(g),
            _ => None,
        }
    }

    fn build_imputer(&self, s: SubsetMask) -> Result<Imputer> {
        let d = self.dim();
        let hidden = s.complement(d).features();
        match &self.rule {
            Rule::Conditional { gaussian, .. } => Ok(Imputer {
                hidden,
                conditional: true,
                cond: gaussian.conditioner(&s.features())?,
            }),
            Rule::Marginal {
                source: MarginalSource::Gaussian(g),
                ..
            } => Ok(Imputer {
                cond: g.marginal(&hidden)?.conditioner(&[])?,
                hidden,
                conditional: false,
            }),
            _ => Err(Error::InvalidParameter(
                "imputer requested for a non-Gaussian rule".into(),
            )),
        }
    }

    fn imputer(&self, s: SubsetMask) -> Result<Arc<Imputer>> {
        let d = self.dim();
        if d > CACHE_MAX_FEATURES {
            return Ok(Arc::new(self.build_imputer(s)?));
        }
        let slots = self
            .cache
            .get_or_init(|| (0..1usize << d).map(|_| OnceLock::new()).collect());
        let slot = &slots[s.index()];
        if let Some(imp) = slot.get() {
            return Ok(imp.clone());
        }
        let imp = Arc::new(self.build_imputer(s)?);
        Ok(slot.get_or_init(|| imp).clone())
    }

    /// `n` imputed inputs `(x_S, x_removed)` drawn from the removal rule.
    ///
    /// Baseline removal repeats its single deterministic point. An exact
    /// dataset rule draws rows with replacement like a sampled one.
    pub fn impute(&self, x: &[f64], s: SubsetMask, n: usize, rng: &mut Rng) -> Result<Matrix> {
        let d = self.dim();
        check_dims(d, x.len())?;
        let mut out = Matrix::zeros(n, d);
        for r in 0..n {
            out.row_mut(r).copy_from_slice(x);
        }
        match &self.rule {
            Rule::Baseline(b) => {
                for r in 0..n {
                    let row = out.row_mut(r);
                    for j in s.complement(d).features() {
                        row[j] = b[j];
                    }
                }
            }
            Rule::Marginal {
                source: MarginalSource::Dataset(ds),
                ..
            } => {
                let hidden = s.complement(d).features();
                for r in 0..n {
                    let src = ds.row(rng.below(ds.n() as u64) as usize);
                    let row = out.row_mut(r);
                    for &j in &hidden {
                        row[j] = src[j];
                    }
                }
            }
            _ => {
                let imp = self.imputer(s)?;
                let mean = imp.mean(x)?;
                let mut draw = vec![0.0; imp.hidden.len()];
                for r in 0..n {
                    imp.cond.sample_hidden(&mean, rng, &mut draw);
                    let row = out.row_mut(r);
                    for (k, &j) in imp.hidden.iter().enumerate() {
                        row[j] = draw[k];
                    }
                }
            }
        }
        Ok(out)
    }
}

fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            expected,
            actual,
            context: "explicand width vs removal strategy",
        });
    }
    Ok(())
}

fn mean_prediction<M: Model + ?Sized>(f: &M, inputs: &Matrix) -> Result<f64> {
    let preds = f.predict_batch(inputs)?;
    Ok(preds.iter().sum::<f64>() / preds.len() as f64)
}

/// `f(x_S)`: the model's prediction with the features outside `s` removed.
///
/// The full set short-circuits to `f(x)`. Exact Gaussian rules need a
/// generalized linear model: the removed features enter only through the
/// one-dimensional projection `beta . x`, whose Gaussian law gives the
/// average in closed form (identity link) or by quadrature (sigmoid link).
pub fn evaluate_subset<M: Model + ?Sized>(
    f: &M,
    x: &[f64],
    s: SubsetMask,
    strat: &RemovalStrategy,
    rng: &mut Rng,
) -> Result<f64> {
    let d = strat.dim();
    check_dims(d, x.len())?;
    check_dims(f.dim(), d)?;
    if s == SubsetMask::full(d) {
        return f.predict(x);
    }
    match (&strat.rule, strat.mode()) {
        (Rule::Baseline(_), _) => {
            let m = strat.impute(x, s, 1, rng)?;
            f.predict(m.row(0))
        }
        (
            Rule::Marginal {
                source: MarginalSource::Dataset(ds),
                ..
            },
            RemovalMode::Exact,
        ) => {
            let mut m = Matrix::zeros(ds.n(), d);
            for r in 0..ds.n() {
                let row = m.row_mut(r);
                let src = ds.row(r);
                for j in 0..d {
                    row[j] = if s.contains(j) { x[j] } else { src[j] };
                }
            }
            mean_prediction(f, &m)
        }
        (_, RemovalMode::Sampled(n)) => mean_prediction(f, &strat.impute(x, s, n, rng)?),
        (_, RemovalMode::Exact) => {
            let glm = f.as_glm().ok_or(Error::MissingCapability(
                "exact Gaussian removal (requires a generalized linear model)",
            ))?;
            let imp = strat.imputer(s)?;
            let mean = imp.mean(x)?;
            let beta = &glm.coefficients;
            let mut t = glm.intercept;
            for j in s.features() {
                t += beta[j] * x[j];
            }
            let beta_h: Vec<f64> = imp.hidden.iter().map(|&j| beta[j]).collect();
            t += dot(&beta_h, &mean);
            Ok(match glm.link {
                Link::Identity => t,
                Link::Sigmoid => {
                    let var = match imp.cond.covariance() {
                        Some(cov) => dot(&beta_h, &cov.matvec(&beta_h)),
                        None => 0.0,
                    };
                    logistic_normal_mean(t, var)
                }
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{FnModel, GeneralizedLinearModel};
    use crate::numerics::{sigmoid, SymMatrix};

    fn linear(beta: &[f64]) -> GeneralizedLinearModel {
        GeneralizedLinearModel::new(beta.to_vec(), 0.5, Link::Identity)
    }

    #[test]
    fn full_set_short_circuits() {
        let f = linear(&[1.0, 2.0]);
        let g = GaussianModel::standard(2).unwrap();
        let strategies = [
            RemovalStrategy::baseline(vec![9.0, 9.0]),
            RemovalStrategy::marginal_gaussian(g.clone(), RemovalMode::Sampled(3)).unwrap(),
            RemovalStrategy::conditional(g, RemovalMode::Exact).unwrap(),
        ];
        for s in &strategies {
            let v = evaluate_subset(&f, &[1.0, 1.0], SubsetMask::full(2), s, &mut Rng::new(0, 0));
            assert_eq!(v.unwrap(), 3.5);
        }
    }

    #[test]
    fn baseline_empty_set_is_prediction_at_baseline() {
        let f = linear(&[1.0, 2.0]);
        let s = RemovalStrategy::baseline(vec![3.0, -1.0]);
        let v = evaluate_subset(&f, &[0.0, 0.0], SubsetMask::empty(), &s, &mut Rng::new(0, 0));
        assert_eq!(v.unwrap(), 1.5);
    }

    #[test]
    fn exact_dataset_average_on_linear_model() {
        let rows = Matrix::from_rows(&[vec![1.0, 0.0, 2.0], vec![3.0, -2.0, 0.0]]).unwrap();
        let ds = Dataset::unnamed(rows, None).unwrap();
        let mu = ds.column_means();
        let beta = [1.5, -1.0, 0.25];
        let f = GeneralizedLinearModel::new(beta.to_vec(), 0.0, Link::Identity);
        let strat = RemovalStrategy::marginal_dataset(ds, RemovalMode::Exact).unwrap();
        let x = [0.3, 0.7, -1.1];
        for s in SubsetMask::all(3) {
            let want: f64 = (0..3)
                .map(|j| beta[j] * if s.contains(j) { x[j] } else { mu[j] })
                .sum();
            let got = evaluate_subset(&f, &x, s, &strat, &mut Rng::new(0, 0)).unwrap();
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_modes_need_linear_structure() {
        let f = FnModel::new(2, |x: &[f64]| x[0] * x[1]);
        let strat =
            RemovalStrategy::conditional(GaussianModel::standard(2).unwrap(), RemovalMode::Exact)
                .unwrap();
        let err = evaluate_subset(&f, &[1.0, 1.0], SubsetMask::new(1), &strat, &mut Rng::new(0, 0));
        assert!(matches!(err, Err(Error::MissingCapability(_))));
    }

    #[test]
    fn exact_sigmoid_matches_sampling() {
        let cov = SymMatrix::from_rows(&[
            vec![1.0, 0.6, 0.0],
            vec![0.6, 1.0, 0.3],
            vec![0.0, 0.3, 1.0],
        ])
        .unwrap();
        let g = GaussianModel::new(vec![0.2, -0.1, 0.0], cov).unwrap();
        let f = GeneralizedLinearModel::new(vec![2.0, -1.0, 1.5], 0.1, Link::Sigmoid);
        let x = [0.5, 1.0, -0.5];
        for make in [RemovalStrategy::conditional, RemovalStrategy::marginal_gaussian] {
            let exact = make(g.clone(), RemovalMode::Exact).unwrap();
            let sampled = make(g.clone(), RemovalMode::Sampled(200_000)).unwrap();
            for s in SubsetMask::all(3) {
                let e = evaluate_subset(&f, &x, s, &exact, &mut Rng::new(0, 0)).unwrap();
                let m = evaluate_subset(&f, &x, s, &sampled, &mut Rng::new(1, s.bits())).unwrap();
                assert!((e - m).abs() < 5e-3, "{s}: exact {e} vs sampled {m}");
            }
        }
        // a point mass removal reduces to plugging in the mean
        let strat =
            RemovalStrategy::conditional(GaussianModel::correlated_pair(2, 1.0).unwrap(), RemovalMode::Exact)
                .unwrap();
        let f2 = GeneralizedLinearModel::new(vec![1.0, 2.0], 0.0, Link::Sigmoid);
        let v = evaluate_subset(&f2, &[0.4, 9.0], SubsetMask::new(1), &strat, &mut Rng::new(0, 0))
            .unwrap();
        assert!((v - sigmoid(1.2)).abs() < 1e-12);
    }

    #[test]
    fn imputation_respects_kept_features() {
        let g = GaussianModel::standard(3).unwrap();
        let strat = RemovalStrategy::marginal_gaussian(g, RemovalMode::Sampled(5)).unwrap();
        let m = strat
            .impute(&[7.0, 8.0, 9.0], SubsetMask::new(0b010), 5, &mut Rng::new(0, 0))
            .unwrap();
        for r in 0..5 {
            assert_eq!(m[(r, 1)], 8.0);
            assert_ne!(m[(r, 0)], 7.0);
        }
    }

    #[test]
    fn zero_samples_rejected() {
        let g = GaussianModel::standard(2).unwrap();
        assert!(RemovalStrategy::conditional(g, RemovalMode::Sampled(0)).is_err());
    }

    #[test]
    fn kind_round_trip() {
        for k in RemovalKind::ALL {
            assert_eq!(k.as_str().parse::<RemovalKind>().unwrap(), k);
        }
        assert!("cond".parse::<RemovalKind>().is_err());
    }
}
