//! Independent reference implementations used by several test targets.
#![allow(dead_code)]

use removal_attrib::numerics::Rng;

/// Every ordering of `0..d`, built by insertion.
pub fn orderings(d: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for item in 0..d {
        let mut next = Vec::new();
        for p in &out {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, item);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Shapley values as the average marginal contribution over all `d!`
/// orderings of a game given as a table indexed by subset bits.
pub fn brute_shapley(d: usize, game: &[f64]) -> Vec<f64> {
    let perms = orderings(d);
    let mut phi = vec![0.0; d];
    for p in &perms {
        let mut s = 0usize;
        for &i in p {
            phi[i] += game[s | 1 << i] - game[s];
            s |= 1 << i;
        }
    }
    phi.iter().map(|v| v / perms.len() as f64).collect()
}

/// Banzhaf values: mean marginal contribution over the subsets missing `i`.
pub fn brute_banzhaf(d: usize, game: &[f64]) -> Vec<f64> {
    (0..d)
        .map(|i| {
            let without: Vec<usize> = (0..1usize << d).filter(|s| s & (1 << i) == 0).collect();
            without.iter().map(|&s| game[s | 1 << i] - game[s]).sum::<f64>() / without.len() as f64
        })
        .collect()
}

/// A point drawn uniformly from the probability simplex.
pub fn random_simplex(n: usize, rng: &mut Rng) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.uniform()).ln()).collect();
    let total: f64 = e.iter().sum();
    e.iter().map(|v| v / total).collect()
}

/// A random permutation of `0..d`.
pub fn random_ordering(d: usize, rng: &mut Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..d).collect();
    rng.shuffle(&mut p);
    p
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}
