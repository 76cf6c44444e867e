use super::{binomial, check_dense, SummaryKind, SummaryOperator};
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::removal::SubsetMask;

const SIMPLEX_TOL: f64 = 1e-10;

fn check_simplex(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|&a| !(a >= 0.0) || !a.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what} must be nonnegative")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidParameter(format!("{what} sum to {total}, not 1")));
    }
    Ok(())
}

/// Weights `alpha_k` on coalition size `k = 1..d` for a semivalue.
#[derive(Debug, Clone, PartialEq)]
pub struct CardinalityWeights {
    alpha: Vec<f64>,
}

impl CardinalityWeights {
    /// `alpha[k - 1]` is the weight on cardinality `k`.
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidParameter("need at least one weight".into()));
        }
        check_simplex(&alpha, "cardinality weights")?;
        Ok(Self { alpha })
    }

    pub fn d(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Uniform over sizes: the Shapley value.
    pub fn shapley(d: usize) -> Result<Self> {
        Self::new(vec![1.0 / d as f64; d])
    }

    /// `C(d-1, k-1) / 2^(d-1)`: the Banzhaf value.
    pub fn banzhaf(d: usize) -> Result<Self> {
        let scale = 0.5f64.powi(d as i32 - 1);
        Self::new((1..=d).map(|k| binomial(d - 1, k - 1) * scale).collect())
    }

    /// All weight on size `k` (`k = d` is leave-one-out, `k = 1` leave-one-in).
    pub fn indicator(d: usize, k: usize) -> Result<Self> {
        if k == 0 || k > d {
            return Err(Error::InvalidParameter(format!("size {k} outside 1..={d}")));
        }
        let mut alpha = vec![0.0; d];
        alpha[k - 1] = 1.0;
        Self::new(alpha)
    }
}

/// A probability distribution over feature orderings.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderDistribution {
    d: usize,
    support: Vec<(Vec<usize>, f64)>,
}

impl OrderDistribution {
    pub fn new(d: usize, support: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidParameter("empty ordering distribution".into()));
        }
        for (perm, _) in &support {
            let mut seen = vec![false; d];
            if perm.len() != d || perm.iter().any(|&i| i >= d || std::mem::replace(&mut seen[i], true)) {
                return Err(Error::InvalidParameter(format!(
                    "{perm:?} is not a permutation of 0..{d}"
                )));
            }
        }
        let probs: Vec<f64> = support.iter().map(|(_, p)| *p).collect();
        check_simplex(&probs, "ordering probabilities")?;
        Ok(Self { d, support })
    }

    /// All mass on one ordering.
    pub fn single(order: Vec<usize>) -> Result<Self> {
        Self::new(order.len(), vec![(order, 1.0)])
    }

    /// Uniform over all `d!` orderings (the Shapley value).
    pub fn uniform(d: usize) -> Result<Self> {
        if d > 8 {
            return Err(Error::InvalidParameter(format!(
                "enumerating {d}! orderings is not supported"
            )));
        }
        let perms = permutations(d);
        let p = 1.0 / perms.len() as f64;
        Self::new(d, perms.into_iter().map(|q| (q, p)).collect())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn support(&self) -> &[(Vec<usize>, f64)] {
        &self.support
    }
}

/// All permutations of `0..d` in lexicographic order.
pub fn permutations(d: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..d).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..d).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..d).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

/// Semivalue `sum_k alpha_k A^(k)`: a feature in `S` gets
/// `alpha_|S| / C(d-1, |S|-1)`, a feature outside gets
/// `-alpha_(|S|+1) / C(d-1, |S|)`.
pub fn build_semivalue(alpha: &CardinalityWeights, d: usize) -> Result<SummaryOperator> {
    check_dense(d)?;
    if alpha.d() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: alpha.d(),
            context: "cardinality weights",
        });
    }
    let a = alpha.alpha();
    let inside: Vec<f64> = (0..=d)
        .map(|s| if s == 0 { 0.0 } else { a[s - 1] / binomial(d - 1, s - 1) })
        .collect();
    let outside: Vec<f64> = (0..=d)
        .map(|s| if s == d { 0.0 } else { -a[s] / binomial(d - 1, s) })
        .collect();
    let entries = fill(d, |i, s| {
        if s.contains(i) {
            inside[s.len()]
        } else {
            outside[s.len()]
        }
    });
    Ok(SummaryOperator::from_parts(
        SummaryKind::Semivalue(alpha.clone()),
        d,
        entries,
    ))
}

/// Random-order value: `A[i, Pre(pi, i) + i] += p(pi)` and
/// `A[i, Pre(pi, i)] -= p(pi)` for every ordering `pi` in the support.
pub fn build_random_order(p: &OrderDistribution, d: usize) -> Result<SummaryOperator> {
    check_dense(d)?;
    if p.d() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: p.d(),
            context: "ordering distribution",
        });
    }
    let mut entries = Matrix::zeros(d, 1 << d);
    for (perm, prob) in p.support() {
        let mut pre = SubsetMask::empty();
        for &i in perm {
            entries[(i, pre.with(i).index())] += prob;
            entries[(i, pre.index())] -= prob;
            pre = pre.with(i);
        }
    }
    let kind = match p.support() {
        [(order, _)] => SummaryKind::SingleOrder(order.clone()),
        _ => SummaryKind::RandomOrder(p.clone()),
    };
    Ok(SummaryOperator::from_parts(kind, d, entries))
}

pub(super) fn fill(d: usize, entry: impl Fn(usize, SubsetMask) -> f64) -> Matrix {
    let mut m = Matrix::zeros(d, 1 << d);
    for i in 0..d {
        let row = m.row_mut(i);
        for (bits, e) in row.iter_mut().enumerate() {
            *e = entry(i, SubsetMask::new(bits as u64));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summary::build_operator;

    fn max_gap(a: &SummaryOperator, b: &SummaryOperator) -> f64 {
        a.entries()
            .as_slice()
            .iter()
            .zip(b.entries().as_slice())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn permutations_enumerate() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(1), vec![vec![0]]);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
    }

    #[test]
    fn semivalue_special_cases() {
        for d in 1..=5 {
            let banzhaf = build_operator(&SummaryKind::Banzhaf, d).unwrap();
            let shapley = build_operator(&SummaryKind::Shapley, d).unwrap();
            let loo = build_operator(&SummaryKind::LeaveOneOut, d).unwrap();
            let sv = |w: CardinalityWeights| build_semivalue(&w, d).unwrap();
            assert!(max_gap(&sv(CardinalityWeights::banzhaf(d).unwrap()), &banzhaf) < 1e-12);
            assert!(max_gap(&sv(CardinalityWeights::shapley(d).unwrap()), &shapley) < 1e-12);
            assert!(max_gap(&sv(CardinalityWeights::indicator(d, d).unwrap()), &loo) < 1e-12);
        }
    }

    #[test]
    fn leave_one_out_basis_by_hand() {
        let a = build_semivalue(&CardinalityWeights::indicator(3, 3).unwrap(), 3).unwrap();
        for i in 0..3 {
            for s in SubsetMask::all(3) {
                let want = if s == SubsetMask::full(3) {
                    1.0
                } else if s == SubsetMask::full(3).without(i) {
                    -1.0
                } else {
                    0.0
                };
                assert_eq!(a.entry(i, s), want);
            }
        }
    }

    #[test]
    fn uniform_orders_give_shapley() {
        for d in 1..=5 {
            let a = build_random_order(&OrderDistribution::uniform(d).unwrap(), d).unwrap();
            let shapley = build_operator(&SummaryKind::Shapley, d).unwrap();
            assert!(max_gap(&a, &shapley) < 1e-12);
        }
    }

    #[test]
    fn single_order_rows() {
        let a = build_random_order(&OrderDistribution::single(vec![0, 1, 2]).unwrap(), 3).unwrap();
        assert!(matches!(a.kind(), SummaryKind::SingleOrder(_)));
        for i in 0..3 {
            let row = a.entries().row(i);
            assert_eq!(row.iter().filter(|&&v| v == 1.0).count(), 1);
            assert_eq!(row.iter().filter(|&&v| v == -1.0).count(), 1);
            assert_eq!(row.iter().filter(|&&v| v != 0.0).count(), 2);
        }
    }

    #[test]
    fn validation() {
        assert!(CardinalityWeights::new(vec![0.5, 0.6]).is_err());
        assert!(CardinalityWeights::new(vec![-0.5, 1.5]).is_err());
        assert!(OrderDistribution::new(2, vec![(vec![0, 0], 1.0)]).is_err());
        assert!(OrderDistribution::new(2, vec![(vec![0, 1], 0.5)]).is_err());
        assert!(build_semivalue(&CardinalityWeights::shapley(3).unwrap(), 4).is_err());
    }
}
