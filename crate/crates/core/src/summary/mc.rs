use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use super::{binomial, SummaryKind};
use crate::error::{Error, Result};
use crate::numerics::{solve_spd, with_workers, Rng, SymMatrix};
use crate::removal::SubsetMask;

/// Monte-Carlo attributions from `n_subsets` sampled coalitions.
///
/// Coalitions are drawn with an independent fair coin per feature; the full
/// and empty coalitions are always included. Each distinct coalition is
/// evaluated once. Supported kinds: Shapley (kernel-weighted least squares
/// with efficiency enforced exactly), Banzhaf and RISE (conditional means),
/// and LIME (kernel-weighted least squares).
pub fn attribute_mc(
    kind: &SummaryKind,
    oracle: &(dyn Fn(SubsetMask) -> Result<f64> + Sync),
    d: usize,
    n_subsets: usize,
    rng: &Rng,
    workers: usize,
) -> Result<Vec<f64>> {
    if d == 0 || d > 63 {
        return Err(Error::InvalidParameter(format!(
            "Monte-Carlo attributions support 1..=63 features, got {d}"
        )));
    }
    if n_subsets < d + 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least d + 2 = {} sampled subsets, got {n_subsets}",
            d + 2
        )));
    }
    let full = SubsetMask::full(d);
    let mut draw = rng.derive(0);
    let mut sample = vec![SubsetMask::empty(), full];
    sample.extend((2..n_subsets).map(|_| SubsetMask::new(draw.next_u64() & full.bits())));

    let distinct: Vec<SubsetMask> = sample.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if distinct.len() < d + 1 {
        return Err(Error::Estimation(format!(
            "only {} distinct subsets sampled; need at least {}",
            distinct.len(),
            d + 1
        )));
    }
    let values = with_workers(workers, || {
        distinct
            .par_iter()
            .map(|&s| oracle(s))
            .collect::<Result<Vec<f64>>>()
    })?;
    let value: HashMap<SubsetMask, f64> = distinct.into_iter().zip(values).collect();
    let v = |s: &SubsetMask| value[s];

    match kind {
        SummaryKind::Rise | SummaryKind::Banzhaf => {
            let mut sum_in = vec![0.0; d];
            let mut cnt_in = vec![0usize; d];
            let mut sum_out = vec![0.0; d];
            let mut cnt_out = vec![0usize; d];
            for s in &sample {
                let y = v(s);
                for i in 0..d {
                    if s.contains(i) {
                        sum_in[i] += y;
                        cnt_in[i] += 1;
                    } else {
                        sum_out[i] += y;
                        cnt_out[i] += 1;
                    }
                }
            }
            (0..d)
                .map(|i| {
                    let m_in = sum_in[i] / cnt_in[i] as f64;
                    if *kind == SummaryKind::Rise {
                        Ok(m_in)
                    } else {
                        Ok(m_in - sum_out[i] / cnt_out[i] as f64)
                    }
                })
                .collect()
        }
        SummaryKind::Shapley => kernel_shap(&sample, &v, d),
        SummaryKind::Lime(cfg) => {
            cfg.validate()?;
            let p = d + 1;
            let mut normal = vec![0.0; p * p];
            let mut rhs = vec![0.0; p];
            let mut z = vec![0.0; p];
            for s in &sample {
                let w = cfg.kernel(s.len(), d);
                z[0] = 1.0;
                for i in 0..d {
                    z[i + 1] = if s.contains(i) { 1.0 } else { 0.0 };
                }
                let y = v(s);
                for a in 0..p {
                    rhs[a] += w * z[a] * y;
                    for b in 0..p {
                        normal[a * p + b] += w * z[a] * z[b];
                    }
                }
            }
            for a in 1..p {
                normal[a * p + a] += cfg.ridge;
            }
            let coef = solve_spd(&SymMatrix::new(p, normal)?, &rhs)
                .map_err(|e| Error::Estimation(format!("LIME design is degenerate: {e}")))?;
            Ok(coef[1..].to_vec())
        }
        other => Err(Error::InvalidParameter(format!(
            "no Monte-Carlo estimator for {}",
            other.name()
        ))),
    }
}

/// Shapley-kernel weight of a coalition of size `s` (finite for `0 < s < d`).
pub fn shapley_kernel(s: usize, d: usize) -> f64 {
    (d - 1) as f64 / (binomial(d, s) * s as f64 * (d - s) as f64)
}

fn kernel_shap(sample: &[SubsetMask], v: &dyn Fn(&SubsetMask) -> f64, d: usize) -> Result<Vec<f64>> {
    let full = SubsetMask::full(d);
    let base = v(&SubsetMask::empty());
    let total = v(&full) - base;
    if d == 1 {
        return Ok(vec![total]);
    }
    // eliminate the last coefficient: phi_last = total - sum(others)
    let p = d - 1;
    let last = d - 1;
    let mut normal = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    let mut u = vec![0.0; p];
    for s in sample {
        let k = s.len();
        if k == 0 || k == d {
            continue;
        }
        let w = shapley_kernel(k, d);
        let z_last = if s.contains(last) { 1.0 } else { 0.0 };
        let y = v(s) - base - z_last * total;
        for (j, uj) in u.iter_mut().enumerate() {
            *uj = if s.contains(j) { 1.0 } else { 0.0 } - z_last;
        }
        for a in 0..p {
            rhs[a] += w * u[a] * y;
            for b in 0..p {
                normal[a * p + b] += w * u[a] * u[b];
            }
        }
    }
    let theta = solve_spd(&SymMatrix::new(p, normal)?, &rhs)
        .map_err(|e| Error::Estimation(format!("sampled Shapley design is degenerate: {e}")))?;
    let mut phi = theta.clone();
    phi.push(total - theta.iter().sum::<f64>());
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_game_is_recovered_exactly() {
        let c = [1.5, -2.0, 0.25, 3.0, -0.5];
        let oracle = |s: SubsetMask| -> Result<f64> {
            Ok(s.features().iter().map(|&j| c[j]).sum::<f64>() + 0.7)
        };
        let phi = attribute_mc(&SummaryKind::Shapley, &oracle, 5, 24, &Rng::new(1, 0), 1).unwrap();
        for i in 0..5 {
            assert!((phi[i] - c[i]).abs() < 1e-6, "{phi:?}");
        }
    }

    #[test]
    fn too_few_subsets() {
        let oracle = |_: SubsetMask| -> Result<f64> { Ok(0.0) };
        let err = attribute_mc(&SummaryKind::Banzhaf, &oracle, 4, 5, &Rng::new(0, 0), 1);
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn unsupported_kind() {
        let oracle = |_: SubsetMask| -> Result<f64> { Ok(0.0) };
        let err = attribute_mc(&SummaryKind::LeaveOneOut, &oracle, 3, 50, &Rng::new(0, 0), 1);
        assert!(err.is_err());
    }

    #[test]
    fn rise_of_indicator_game() {
        // v(S) = 1 iff feature 0 is kept: RISE gives 1 for feature 0 and
        // roughly 1/2 for the others
        let oracle = |s: SubsetMask| -> Result<f64> { Ok(if s.contains(0) { 1.0 } else { 0.0 }) };
        let phi = attribute_mc(&SummaryKind::Rise, &oracle, 3, 4000, &Rng::new(4, 0), 1).unwrap();
        assert_eq!(phi[0], 1.0);
        assert!((phi[1] - 0.5).abs() < 0.05 && (phi[2] - 0.5).abs() < 0.05);
    }
}
