use super::probabilistic::fill;
use super::{binomial, check_dense, SummaryKind, SummaryOperator};
use crate::error::{Error, Result};
use crate::numerics::{solve_spd_many, Matrix, SymMatrix};
use crate::removal::SubsetMask;

/// Settings for the LIME surrogate regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimeConfig {
    pub sigma2: f64,
    pub fit_intercept: bool,
    pub ridge: f64,
}

impl LimeConfig {
    pub fn new(sigma2: f64) -> Result<Self> {
        let cfg = Self {
            sigma2,
            fit_intercept: true,
            ridge: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_intercept(self, fit_intercept: bool) -> Self {
        Self {
            fit_intercept,
            ..self
        }
    }

    pub fn with_ridge(self, ridge: f64) -> Result<Self> {
        let cfg = Self { ridge, ..self };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reference width for image superpixels.
    pub fn image_preset() -> Self {
        Self::new(0.25).expect("valid preset")
    }

    /// Reference width for text.
    pub fn text_preset() -> Self {
        Self::new(25.0).expect("valid preset")
    }

    /// Reference width for tabular data, `0.75 sqrt(d)`.
    pub fn tabular_preset(d: usize) -> Self {
        Self::new(0.75 * (d.max(1) as f64).sqrt()).expect("valid preset")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lime sigma2 must be positive, got {}",
                self.sigma2
            )));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lime ridge must be nonnegative, got {}",
                self.ridge
            )));
        }
        Ok(())
    }

    /// Kernel weight for a coalition of size `k` out of `d`, scaled so the
    /// largest weight (the full coalition) is 1.
    pub fn kernel(&self, k: usize, d: usize) -> f64 {
        let dist = 1.0 - (k as f64 / d as f64).sqrt();
        (-dist * dist / self.sigma2).exp()
    }

    fn weights(&self, d: usize) -> Vec<f64> {
        let w: Vec<f64> = (0..=d).map(|k| self.kernel(k, d)).collect();
        let max = w.iter().cloned().fold(0.0, f64::max);
        w.iter().map(|v| v / max).collect()
    }
}

/// Entries of the weighted normal matrix summed over all subsets:
/// `a0 = sum_S w(S)`, `a1 = sum_{S contains i} w(S)`,
/// `a2 = sum_{S contains i, j} w(S)` for `i != j`.
pub fn lime_moments(cfg: &LimeConfig, d: usize) -> (f64, f64, f64) {
    let w = cfg.weights(d);
    let mut a = (0.0, 0.0, 0.0);
    for (k, wk) in w.iter().enumerate() {
        a.0 += binomial(d, k) * wk;
        if k >= 1 {
            a.1 += binomial(d - 1, k - 1) * wk;
        }
        if k >= 2 {
            a.2 += binomial(d - 2, k - 2) * wk;
        }
    }
    a
}

/// Linear operator of the weighted least-squares LIME fit over all subsets.
pub fn build_lime(cfg: &LimeConfig, d: usize) -> Result<SummaryOperator> {
    cfg.validate()?;
    check_dense(d)?;
    let entries = if cfg.fit_intercept && cfg.ridge == 0.0 {
        if d == 1 {
            // two points, two parameters: the fit interpolates
            Matrix::from_vec(1, 2, vec![-1.0, 1.0])?
        } else {
            structured(cfg, d)?
        }
    } else {
        general(cfg, d)?
    };
    Ok(SummaryOperator::from_parts(SummaryKind::Lime(*cfg), d, entries))
}

// Closed-form inverse of the intercept model's normal matrix. With
// c = a1 - a2, D = a0 c - d (a1^2 - a0 a2) and s = |S|,
//   A[i, S] = w(S) / c * (1[i in S] + (s X - a1 c) / D),  X = a1^2 - a0 a2.
// Every quadratic form in the kernel weights is summed pair by pair with an
// exact integer coefficient, so leading terms that cancel analytically
// cancel exactly. This keeps the operator accurate when the weights of small
// coalitions underflow relative to the full one.
fn structured(cfg: &LimeConfig, d: usize) -> Result<Matrix> {
    let w = cfg.weights(d);
    let n: Vec<f64> = (0..=d).map(|k| binomial(d, k)).collect();
    let df = d as f64;
    let q = 2.0 * df * df * (df - 1.0);
    let c: f64 = (1..d).map(|k| binomial(d - 2, k - 1) * w[k]).sum();

    let coef_x = |k: f64, l: f64| 2.0 * k * l * (df - 1.0) - df * (k * (k - 1.0) + l * (l - 1.0));
    let coef_d = |k: f64, l: f64| df * (df - 1.0) * (k - l) * (k - l);
    let coef_ac = |k: f64, l: f64| k * l * (2.0 * df - k - l);
    let form = |coef: &dyn Fn(f64, f64) -> f64| -> f64 {
        let mut acc = 0.0;
        for k in 0..=d {
            for l in 0..=d {
                let e = coef(k as f64, l as f64);
                if e != 0.0 {
                    acc += n[k] * n[l] * w[k] * w[l] * e;
                }
            }
        }
        acc / q
    };
    let big_d = form(&coef_d);
    if !(c > 0.0 && big_d > 0.0 && (c * big_d).is_normal()) {
        return Err(Error::LimeConditioning { sigma2: cfg.sigma2 });
    }
    let scale = c * big_d;
    let mut inside = vec![0.0; d + 1];
    let mut outside = vec![0.0; d + 1];
    for s in 0..=d {
        let sf = s as f64;
        inside[s] =
            w[s] * form(&|k, l| coef_d(k, l) - coef_ac(k, l) + sf * coef_x(k, l)) / scale;
        outside[s] = w[s] * form(&|k, l| sf * coef_x(k, l) - coef_ac(k, l)) / scale;
    }
    Ok(fill(d, |i, s| {
        if s.contains(i) {
            inside[s.len()]
        } else {
            outside[s.len()]
        }
    }))
}

fn general(cfg: &LimeConfig, d: usize) -> Result<Matrix> {
    let (a0, a1, a2) = lime_moments(cfg, d);
    let off = usize::from(cfg.fit_intercept);
    let p = d + off;
    let mut nm = Matrix::zeros(p, p);
    for r in 0..p {
        for col in 0..p {
            nm[(r, col)] = match (r < off, col < off) {
                (true, true) => a0,
                (true, false) | (false, true) => a1,
                (false, false) if r == col => a1,
                _ => a2,
            };
        }
        nm[(r, r)] += cfg.ridge;
    }
    let inv = solve_spd_many(&SymMatrix::symmetrize(&nm)?, &Matrix::identity(p)).map_err(|e| {
        match e {
            Error::Singular { .. } if cfg.ridge == 0.0 => {
                Error::LimeConditioning { sigma2: cfg.sigma2 }
            }
            other => other,
        }
    })?;
    let w = cfg.weights(d);
    let mut entries = Matrix::zeros(d, 1 << d);
    let mut partial = vec![0.0; 1 << d];
    for i in 0..d {
        let r = i + off;
        partial[0] = if cfg.fit_intercept { inv[(r, 0)] } else { 0.0 };
        for bits in 1..1usize << d {
            let low = bits.trailing_zeros() as usize;
            partial[bits] = partial[bits & (bits - 1)] + inv[(r, low + off)];
        }
        let row = entries.row_mut(i);
        for bits in 0..1usize << d {
            row[bits] = w[SubsetMask::new(bits as u64).len()] * partial[bits];
        }
    }
    Ok(entries)
}
