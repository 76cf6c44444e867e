//! Robustness certificates: how far attributions can move when the input or
//! the model is perturbed.
//!
//! Input perturbations are bounded by `g(removal) * h(summary) * ||x - x'||`
//! with `g = L` for baseline and marginal removal and `g = L + 2BM` for
//! conditional removal, and `h = 2 sqrt(d)` for probabilistic values or
//! `sqrt(d)` for RISE. Model perturbations are bounded by
//! `h(summary) * ||f - f'||`, measured everywhere (baseline, marginal) or on
//! the data manifold (conditional).

use std::fmt;

use crate::error::{Error, Result};
use crate::models::Model;
use crate::numerics::{Matrix, Rng};
use crate::removal::{RemovalKind, RemovalStrategy, SubsetMask};
use crate::summary::{SummaryKind, SummaryOperator};

// 0 * inf is taken as 0: a vanishing factor removes the term entirely.
fn mul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

fn check_constant(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || v < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "{name} must be nonnegative, got {v}"
        )));
    }
    Ok(())
}

/// `L` for baseline and marginal removal, `L + 2BM` for conditional removal.
pub fn g_removal(kind: RemovalKind, l: f64, b: f64, m: f64) -> Result<f64> {
    check_constant("L", l)?;
    check_constant("B", b)?;
    check_constant("M", m)?;
    Ok(match kind {
        RemovalKind::Baseline | RemovalKind::Marginal => l,
        RemovalKind::Conditional => l + 2.0 * mul(b, m),
    })
}

/// `2 sqrt(d)` for probabilistic values, `sqrt(d)` for RISE. With feature
/// groups pass the number of groups as `d`.
pub fn h_summary(kind: &SummaryKind, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidParameter("need at least one feature".into()));
    }
    let root = (d as f64).sqrt();
    match kind {
        SummaryKind::Rise => Ok(root),
        k if k.is_probabilistic() => Ok(2.0 * root),
        SummaryKind::Lime(_) => Err(Error::NoClosedForm("the LIME exponential kernel")),
        other => Err(Error::NoClosedForm(other.name())),
    }
}

/// Ingredients and evaluated constants of an input-perturbation certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessCertificate {
    pub removal: RemovalKind,
    pub summary: String,
    pub lipschitz: f64,
    pub bound: f64,
    pub tv_constant: f64,
    pub g: f64,
    pub h: f64,
    /// `h` came from the operator's numeric (1, infinity) norm.
    pub numeric_h: bool,
    pub sampling_term: f64,
    pub confidence: f64,
}

impl RobustnessCertificate {
    /// Certificate with the closed-form `h` for `summary` over `d` players.
    pub fn new(
        removal: RemovalKind,
        summary: &SummaryKind,
        d: usize,
        l: f64,
        b: f64,
        m: f64,
    ) -> Result<Self> {
        Ok(Self {
            removal,
            summary: summary.name().to_string(),
            lipschitz: l,
            bound: b,
            tv_constant: m,
            g: g_removal(removal, l, b, m)?,
            h: h_summary(summary, d)?,
            numeric_h: false,
            sampling_term: 0.0,
            confidence: 1.0,
        })
    }

    /// Certificate for a built operator; kinds without a closed-form `h`
    /// fall back to the operator's (1, infinity) norm.
    pub fn for_operator(
        removal: RemovalKind,
        op: &SummaryOperator,
        l: f64,
        b: f64,
        m: f64,
    ) -> Result<Self> {
        match Self::new(removal, op.kind(), op.d(), l, b, m) {
            Err(Error::NoClosedForm(_)) => Ok(Self {
                removal,
                summary: op.kind().name().to_string(),
                lipschitz: l,
                bound: b,
                tv_constant: m,
                g: g_removal(removal, l, b, m)?,
                h: op.norms()?.one_inf,
                numeric_h: true,
                sampling_term: 0.0,
                confidence: 1.0,
            }),
            other => other,
        }
    }

    /// Theoretical slope `g * h` of attribution change against input change.
    pub fn slope(&self) -> f64 {
        mul(self.g, self.h)
    }
}

/// `g * h * ||x - x'||`.
pub fn input_bound(cert: &RobustnessCertificate, perturbation: f64) -> f64 {
    mul(cert.slope(), perturbation)
}

/// Where probe inputs for a functional distance were drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceDomain {
    /// Broad probes standing in for the whole input space.
    EverywhereProxy,
    /// Samples from the data distribution.
    OnManifold,
}

impl DistanceDomain {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::EverywhereProxy => "everywhere-proxy",
            Self::OnManifold => "on-manifold",
        }
    }

    /// Domain on which model distance must be measured for a removal kind.
    pub fn required_by(kind: RemovalKind) -> Self {
        match kind {
            RemovalKind::Conditional => Self::OnManifold,
            RemovalKind::Baseline | RemovalKind::Marginal => Self::EverywhereProxy,
        }
    }
}

impl fmt::Display for DistanceDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Largest observed `|f(x) - f'(x)|` over a set of probes.
///
/// This under-estimates the supremum; bounds built from it carry
/// [`ModelBound::lower_bound_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalDistanceEstimate {
    pub value: f64,
    pub samples: usize,
    pub domain: DistanceDomain,
}

impl FunctionalDistanceEstimate {
    pub fn zero(domain: DistanceDomain) -> Self {
        Self {
            value: 0.0,
            samples: 0,
            domain,
        }
    }
}

pub fn empirical_sup_distance<F, G>(
    f: &F,
    f_prime: &G,
    probes: &Matrix,
    domain: DistanceDomain,
) -> Result<FunctionalDistanceEstimate>
where
    F: Model + ?Sized,
    G: Model + ?Sized,
{
    if probes.rows() == 0 {
        return Err(Error::NoData);
    }
    let a = f.predict_batch(probes)?;
    let b = f_prime.predict_batch(probes)?;
    let value = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(FunctionalDistanceEstimate {
        value,
        samples: probes.rows(),
        domain,
    })
}

/// A model-perturbation bound and whether it rests on an estimated distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelBound {
    pub value: f64,
    pub lower_bound_estimate: bool,
}

/// `h(summary) * ||f - f'||` on the domain the removal kind requires.
pub fn model_bound(
    removal: RemovalKind,
    summary: &SummaryKind,
    d: usize,
    dist: &FunctionalDistanceEstimate,
) -> Result<ModelBound> {
    let expected = DistanceDomain::required_by(removal);
    if dist.domain != expected {
        return Err(Error::DomainMismatch {
            expected: expected.as_str(),
            actual: dist.domain.as_str(),
            removal: removal.as_str(),
        });
    }
    Ok(ModelBound {
        value: mul(h_summary(summary, d)?, dist.value),
        lower_bound_estimate: dist.samples > 0,
    })
}

/// Simultaneous input and model perturbation:
/// `g h ||x - x'|| + h ||f - f'||`.
pub fn combined_bound(
    cert: &RobustnessCertificate,
    perturbation: f64,
    dist: &FunctionalDistanceEstimate,
) -> Result<f64> {
    let expected = DistanceDomain::required_by(cert.removal);
    if dist.domain != expected {
        return Err(Error::DomainMismatch {
            expected: expected.as_str(),
            actual: dist.domain.as_str(),
            removal: cert.removal.as_str(),
        });
    }
    Ok(input_bound(cert, perturbation) + mul(cert.h, dist.value))
}

/// Input bound when both prediction vectors are Monte-Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledBound {
    pub bound: f64,
    /// Union bound over the `2 * 2^d` subset estimates.
    pub confidence: f64,
    /// The union bound is vacuous (confidence clamped at 0).
    pub vacuous: bool,
}

/// `g h ||x - x'|| + h * 2 epsilon`, holding with probability at least
/// `1 - 2 * 2^d * delta_per_subset`. Baseline removal needs no sampling.
pub fn sampling_adjusted_input_bound(
    cert: &RobustnessCertificate,
    perturbation: f64,
    epsilon: f64,
    delta_per_subset: f64,
    d: usize,
) -> Result<SampledBound> {
    check_constant("epsilon", epsilon)?;
    if !(0.0..=1.0).contains(&delta_per_subset) {
        return Err(Error::InvalidParameter(format!(
            "per-subset failure probability must lie in [0, 1], got {delta_per_subset}"
        )));
    }
    let base = input_bound(cert, perturbation);
    if cert.removal == RemovalKind::Baseline || epsilon == 0.0 {
        return Ok(SampledBound {
            bound: base,
            confidence: 1.0,
            vacuous: false,
        });
    }
    let raw = 1.0 - 2.0 * 2f64.powi(d as i32) * delta_per_subset;
    Ok(SampledBound {
        bound: base + mul(cert.h, 2.0 * epsilon),
        confidence: raw.max(0.0),
        vacuous: raw <= 0.0,
    })
}

/// Fraction of `n` imputed points `(x_S, x_removed)` satisfying `membership`.
pub fn on_manifold_probability(
    strat: &RemovalStrategy,
    x: &[f64],
    s: SubsetMask,
    membership: &dyn Fn(&[f64]) -> bool,
    n: usize,
    rng: &Rng,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one draw".into()));
    }
    let points = strat.impute(x, s, n, &mut rng.derive(s.bits()))?;
    let inside = (0..n).filter(|&i| membership(points.row(i))).count();
    Ok(inside as f64 / n as f64)
}
