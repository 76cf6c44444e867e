//! Summary techniques as linear operators `A` mapping the `2^d` subset
//! predictions to `d` attributions, `phi = A v`.

mod axioms;
mod lime;
mod mc;
mod probabilistic;

pub use axioms::{check_axioms, AxiomReport};
pub use lime::{build_lime, lime_moments, LimeConfig};
pub use mc::{attribute_mc, shapley_kernel};
pub use probabilistic::{
    build_random_order, build_semivalue, permutations, CardinalityWeights, OrderDistribution,
};

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numerics::{lambda_max, Matrix};
use crate::removal::{PredictionVector, SubsetMask};

/// Largest `d` for which dense `d x 2^d` operators are built.
pub const DENSE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum SummaryKind {
    LeaveOneOut,
    Shapley,
    Banzhaf,
    Rise,
    Lime(LimeConfig),
    Semivalue(CardinalityWeights),
    RandomOrder(OrderDistribution),
    /// All probability on one ordering (zero-based feature indices).
    SingleOrder(Vec<usize>),
    Custom,
}

impl SummaryKind {
    /// Names accepted by [`FromStr`].
    pub const NAMED: [&'static str; 5] = ["loo", "shapley", "banzhaf", "rise", "lime"];

    pub fn name(&self) -> &'static str {
        match self {
            Self::LeaveOneOut => "loo",
            Self::Shapley => "shapley",
            Self::Banzhaf => "banzhaf",
            Self::Rise => "rise",
            Self::Lime(_) => "lime",
            Self::Semivalue(_) => "semivalue",
            Self::RandomOrder(_) => "random_order",
            Self::SingleOrder(_) => "single_order",
            Self::Custom => "custom",
        }
    }

    /// Whether the operator is a probabilistic value by construction.
    pub fn is_probabilistic(&self) -> bool {
        matches!(
            self,
            Self::LeaveOneOut
                | Self::Shapley
                | Self::Banzhaf
                | Self::Semivalue(_)
                | Self::RandomOrder(_)
                | Self::SingleOrder(_)
        )
    }
}

impl fmt::Display for SummaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses the simple kinds; `lime` uses the tabular preset width for `d = 1`
/// and is normally re-parameterized by the caller.
impl FromStr for SummaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loo" | "leave_one_out" => Ok(Self::LeaveOneOut),
            "shapley" => Ok(Self::Shapley),
            "banzhaf" => Ok(Self::Banzhaf),
            "rise" => Ok(Self::Rise),
            "lime" => Ok(Self::Lime(LimeConfig::tabular_preset(1))),
            other => Err(Error::InvalidParameter(format!(
                "unknown summary kind {other:?} (valid: {})",
                Self::NAMED.join(", ")
            ))),
        }
    }
}

/// Spectral norm and the (1, infinity) operator norm
/// `sqrt(sum_i ||A_i||_1^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorNorms {
    pub spectral: f64,
    pub one_inf: f64,
}

/// Dense operator `A` of shape `d x 2^d`, column `S` at index `S.bits()`.
#[derive(Debug, Clone)]
pub struct SummaryOperator {
    kind: SummaryKind,
    d: usize,
    entries: Matrix,
    norms: OnceLock<OperatorNorms>,
}

pub(crate) fn check_dense(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter("need at least one feature".into()));
    }
    if d > DENSE_LIMIT {
        return Err(Error::TooManyFeatures {
            features: d,
            limit: DENSE_LIMIT,
        });
    }
    Ok(())
}

/// `C(n, k)` as a float (exact for the sizes used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64).round()
}

impl SummaryOperator {
    pub(crate) fn from_parts(kind: SummaryKind, d: usize, entries: Matrix) -> Self {
        Self {
            kind,
            d,
            entries,
            norms: OnceLock::new(),
        }
    }

    /// Wrap an arbitrary `d x 2^d` matrix.
    pub fn custom(entries: Matrix) -> Result<Self> {
        let d = entries.rows();
        check_dense(d)?;
        if entries.cols() != 1 << d {
            return Err(Error::DimensionMismatch {
                expected: 1 << d,
                actual: entries.cols(),
                context: "operator columns",
            });
        }
        Ok(Self::from_parts(SummaryKind::Custom, d, entries))
    }

    pub fn kind(&self) -> &SummaryKind {
        &self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    #[inline]
    pub fn entry(&self, i: usize, s: SubsetMask) -> f64 {
        self.entries[(i, s.index())]
    }

    /// Norms, computed on first use.
    pub fn norms(&self) -> Result<OperatorNorms> {
        if let Some(n) = self.norms.get() {
            return Ok(*n);
        }
        let n = operator_norms(self)?;
        Ok(*self.norms.get_or_init(|| n))
    }

    /// Frobenius distance between two operators of the same size.
    pub fn frobenius_distance(&self, other: &SummaryOperator) -> Result<f64> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                actual: other.d,
                context: "operator dimension",
            });
        }
        Ok(self
            .entries
            .as_slice()
            .iter()
            .zip(other.entries.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

/// Build the dense operator for `kind` over `d` features.
///
/// * leave-one-out: `+1` at the full set, `-1` at the full set minus `i`;
/// * Shapley: `(|S|-1)!(d-|S|)!/d!` for `i` in `S`, `-|S|!(d-|S|-1)!/d!` otherwise;
/// * Banzhaf: `+-1/2^(d-1)`;
/// * RISE: `1/2^(d-1)` for `i` in `S`, else 0.
pub fn build_operator(kind: &SummaryKind, d: usize) -> Result<SummaryOperator> {
    check_dense(d)?;
    let entries = match kind {
        SummaryKind::LeaveOneOut => {
            let full = SubsetMask::full(d);
            probabilistic::fill(d, |i, s| {
                if s == full {
                    1.0
                } else if s == full.without(i) {
                    -1.0
                } else {
                    0.0
                }
            })
        }
        SummaryKind::Shapley => {
            let inside: Vec<f64> = (0..=d)
                .map(|s| if s == 0 { 0.0 } else { 1.0 / (d as f64 * binomial(d - 1, s - 1)) })
                .collect();
            let outside: Vec<f64> = (0..=d)
                .map(|s| if s == d { 0.0 } else { -1.0 / (d as f64 * binomial(d - 1, s)) })
                .collect();
            probabilistic::fill(d, |i, s| {
                if s.contains(i) {
                    inside[s.len()]
                } else {
                    outside[s.len()]
                }
            })
        }
        SummaryKind::Banzhaf => {
            let w = 0.5f64.powi(d as i32 - 1);
            probabilistic::fill(d, |i, s| if s.contains(i) { w } else { -w })
        }
        SummaryKind::Rise => {
            let w = 0.5f64.powi(d as i32 - 1);
            probabilistic::fill(d, |i, s| if s.contains(i) { w } else { 0.0 })
        }
        SummaryKind::Lime(cfg) => return build_lime(cfg, d),
        SummaryKind::Semivalue(alpha) => return build_semivalue(alpha, d),
        SummaryKind::RandomOrder(p) => return build_random_order(p, d),
        SummaryKind::SingleOrder(order) => {
            return build_random_order(&OrderDistribution::single(order.clone())?, d)
        }
        SummaryKind::Custom => {
            return Err(Error::InvalidParameter(
                "custom operators are built with SummaryOperator::custom".into(),
            ))
        }
    };
    Ok(SummaryOperator::from_parts(kind.clone(), d, entries))
}

/// `phi_i = sum_S A[i, S] v_S`.
pub fn attribute(a: &SummaryOperator, v: &PredictionVector) -> Result<Vec<f64>> {
    if a.d() != v.d() {
        return Err(Error::DimensionMismatch {
            expected: a.d(),
            actual: v.d(),
            context: "operator vs prediction vector",
        });
    }
    a.entries.matvec(v.values())
}

/// Spectral norm via the largest eigenvalue of `A A^T`, and the (1, infinity)
/// norm from the row 1-norms.
pub fn operator_norms(a: &SummaryOperator) -> Result<OperatorNorms> {
    let spectral = lambda_max(&a.entries.gram_rows())?.max(0.0).sqrt();
    let one_inf = (0..a.d)
        .map(|i| a.entries.row(i).iter().map(|v| v.abs()).sum::<f64>().powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(OperatorNorms { spectral, one_inf })
}

/// Closed-form norms of the four classical operators.
pub fn closed_form_norms(kind: &SummaryKind, d: usize) -> Result<OperatorNorms> {
    if d == 0 {
        return Err(Error::InvalidParameter("need at least one feature".into()));
    }
    let df = d as f64;
    let two_root_d = 2.0 * df.sqrt();
    match kind {
        SummaryKind::LeaveOneOut => Ok(OperatorNorms {
            spectral: (df + 1.0).sqrt(),
            one_inf: two_root_d,
        }),
        SummaryKind::Shapley => Ok(OperatorNorms {
            spectral: (2.0 / df).sqrt(),
            one_inf: two_root_d,
        }),
        SummaryKind::Banzhaf => Ok(OperatorNorms {
            spectral: 2f64.powf(1.0 - df / 2.0),
            one_inf: two_root_d,
        }),
        SummaryKind::Rise => Ok(OperatorNorms {
            spectral: ((df + 1.0) / 2f64.powi(d as i32)).sqrt(),
            one_inf: df.sqrt(),
        }),
        other => Err(Error::NoClosedForm(other.name())),
    }
}
