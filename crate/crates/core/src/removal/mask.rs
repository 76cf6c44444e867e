use std::fmt;

use crate::error::{Error, Result};

/// Largest feature count for exhaustive subset enumeration.
pub const MAX_EXACT_FEATURES: usize = 25;

/// A feature subset: bit `i` set means feature `i + 1` (column `i`) is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SubsetMask(u64);

impl SubsetMask {
    #[inline]
    pub const fn new(bits: u64) -> Self {
        Self(bits)
    }

    #[inline]
    pub const fn empty() -> Self {
        Self(0)
    }

    #[inline]
    pub const fn full(d: usize) -> Self {
        if d >= 64 {
            Self(u64::MAX)
        } else {
            Self((1u64 << d) - 1)
        }
    }

    pub fn from_features(features: &[usize]) -> Self {
        Self(features.iter().fold(0, |m, &i| m | (1u64 << i)))
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub const fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    #[inline]
    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub const fn with(self, i: usize) -> Self {
        Self(self.0 | 1 << i)
    }

    #[inline]
    pub const fn without(self, i: usize) -> Self {
        Self(self.0 & !(1 << i))
    }

    #[inline]
    pub const fn complement(self, d: usize) -> Self {
        Self(!self.0 & Self::full(d).0)
    }

    #[inline]
    pub const fn union(self, other: Self) -> Self {
        Self(self.0 | other.0)
    }

    #[inline]
    pub const fn intersects(self, other: Self) -> bool {
        self.0 & other.0 != 0
    }

    /// Kept feature indices, ascending.
    pub fn features(self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut b = self.0;
        while b != 0 {
            out.push(b.trailing_zeros() as usize);
            b &= b - 1;
        }
        out
    }

    /// All `2^d` subsets in index order.
    pub fn all(d: usize) -> impl Iterator<Item = SubsetMask> {
        (0..1u64 << d).map(SubsetMask)
    }
}

impl fmt::Display for SubsetMask {
    /// One-based feature numbers, e.g. `{1,3}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.features().iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

pub(crate) fn check_enumerable(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter("need at least one feature".into()));
    }
    if d > MAX_EXACT_FEATURES {
        return Err(Error::TooManyFeatures {
            features: d,
            limit: MAX_EXACT_FEATURES,
        });
    }
    Ok(())
}

/// Disjoint feature groups covering every feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeaturePartition {
    d: usize,
    groups: Vec<SubsetMask>,
}

impl FeaturePartition {
    pub fn new(d: usize, groups: Vec<SubsetMask>) -> Result<Self> {
        check_enumerable(d)?;
        check_enumerable(groups.len())?;
        let mut seen = SubsetMask::empty();
        for (k, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::InvalidParameter(format!("group {} is empty", k + 1)));
            }
            if g.intersects(seen) {
                return Err(Error::InvalidParameter(format!(
                    "group {} overlaps an earlier group",
                    k + 1
                )));
            }
            seen = seen.union(*g);
        }
        if seen != SubsetMask::full(d) {
            return Err(Error::InvalidParameter(format!(
                "groups cover {seen} instead of all {d} features"
            )));
        }
        Ok(Self { d, groups })
    }

    /// Build from lists of zero-based feature indices.
    pub fn from_indices(d: usize, groups: &[Vec<usize>]) -> Result<Self> {
        if groups.iter().flatten().any(|&i| i >= d) {
            return Err(Error::InvalidParameter("group index out of range".into()));
        }
        Self::new(d, groups.iter().map(|g| SubsetMask::from_features(g)).collect())
    }

    pub fn singletons(d: usize) -> Result<Self> {
        Self::new(d, (0..d).map(|i| SubsetMask::from_features(&[i])).collect())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of groups.
    pub fn g(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[SubsetMask] {
        &self.groups
    }

    /// Union of the groups selected by `t` (a mask over groups).
    pub fn expand(&self, t: SubsetMask) -> SubsetMask {
        t.features()
            .iter()
            .fold(SubsetMask::empty(), |m, &k| m.union(self.groups[k]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_basics() {
        assert_eq!(SubsetMask::full(3).bits(), 7);
        assert_eq!(SubsetMask::empty().len(), 0);
        let s = SubsetMask::from_features(&[0, 2]);
        assert_eq!(s.bits(), 5);
        assert!(s.contains(0) && !s.contains(1) && s.contains(2));
        assert_eq!(s.complement(3), SubsetMask::new(2));
        assert_eq!(s.features(), vec![0, 2]);
        assert_eq!(s.to_string(), "{1,3}");
        assert_eq!(s.with(1), SubsetMask::full(3));
        assert_eq!(s.without(0), SubsetMask::new(4));
        assert_eq!(SubsetMask::all(2).count(), 4);
    }

    #[test]
    fn partition_validation() {
        assert!(FeaturePartition::from_indices(4, &[vec![0, 1], vec![2, 3]]).is_ok());
        assert!(FeaturePartition::from_indices(4, &[vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(FeaturePartition::from_indices(4, &[vec![0, 1], vec![2]]).is_err());
        assert!(FeaturePartition::from_indices(4, &[vec![0, 1, 2, 3], vec![]]).is_err());
        assert!(FeaturePartition::from_indices(2, &[vec![0, 5]]).is_err());
    }

    #[test]
    fn partition_expansion() {
        let p = FeaturePartition::from_indices(5, &[vec![0, 3], vec![1], vec![2, 4]]).unwrap();
        assert_eq!(p.g(), 3);
        assert_eq!(p.expand(SubsetMask::new(0b101)), SubsetMask::from_features(&[0, 2, 3, 4]));
        assert_eq!(p.expand(SubsetMask::full(3)), SubsetMask::full(5));
        assert_eq!(p.expand(SubsetMask::empty()), SubsetMask::empty());
    }

    #[test]
    fn enumeration_guard() {
        assert!(check_enumerable(25).is_ok());
        assert_eq!(
            check_enumerable(26),
            Err(Error::TooManyFeatures {
                features: 26,
                limit: 25
            })
        );
    }
}
