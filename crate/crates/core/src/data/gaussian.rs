use crate::error::{Error, Result};
use crate::numerics::{std_normal_cdf, sym_eigen, Matrix, Rng, SymMatrix};

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const PSD_CLAMP: f64 = 1e-10;

/// Multivariate normal `N(mu, Sigma)` with a cached eigendecomposition.
///
/// `Sigma` may be singular: eigenvalues within the clamp threshold of zero
/// are set to exactly zero, and sampling stays on the degenerate subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel {
    mean: Vec<f64>,
    cov: SymMatrix,
    eigenvalues: Vec<f64>,
    // columns V_j * sqrt(lambda_j)
    factor: Matrix,
}

fn clamp_threshold(values: &[f64]) -> f64 {
    PSD_CLAMP * values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

impl GaussianModel {
    pub fn new(mean: Vec<f64>, cov: SymMatrix) -> Result<Self> {
        let d = cov.dim();
        if mean.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: mean.len(),
                context: "gaussian mean",
            });
        }
        let eig = sym_eigen(&cov)?;
        let tol = clamp_threshold(&eig.values);
        if let Some(&bad) = eig.values.iter().find(|&&v| v < -tol) {
            return Err(Error::InvalidParameter(format!(
                "covariance is not positive semidefinite (eigenvalue {bad:e})"
            )));
        }
        let eigenvalues: Vec<f64> = eig
            .values
            .iter()
            .map(|&v| if v <= tol { 0.0 } else { v })
            .collect();
        let mut factor = eig.vectors.clone();
        for i in 0..d {
            for j in 0..d {
                factor[(i, j)] *= eigenvalues[j].sqrt();
            }
        }
        Ok(Self {
            mean,
            cov,
            eigenvalues,
            factor,
        })
    }

    /// `N(0, I_d)`.
    pub fn standard(d: usize) -> Result<Self> {
        Self::new(vec![0.0; d], SymMatrix::identity(d))
    }

    /// Unit variances with correlation `rho` between the first two features.
    pub fn correlated_pair(d: usize, rho: f64) -> Result<Self> {
        if d < 2 || !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidParameter(format!(
                "need d >= 2 and rho in [0, 1], got d = {d}, rho = {rho}"
            )));
        }
        let mut m = Matrix::identity(d);
        m[(0, 1)] = rho;
        m[(1, 0)] = rho;
        Self::new(vec![0.0; d], SymMatrix::new(d, m.into_vec())?)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &SymMatrix {
        &self.cov
    }

    /// Clamped eigenvalues of the covariance, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn is_singular(&self) -> bool {
        self.eigenvalues.iter().any(|&v| v == 0.0)
    }

    /// Write one draw into `out`.
    pub fn sample_into(&self, rng: &mut Rng, out: &mut [f64]) {
        let d = self.dim();
        out.copy_from_slice(&self.mean);
        for j in 0..d {
            if self.eigenvalues[j] == 0.0 {
                continue;
            }
            let z = rng.normal();
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.factor[(i, j)] * z;
            }
        }
    }

    /// `n` draws as the rows of an `n x d` matrix.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Matrix {
        let d = self.dim();
        let mut m = Matrix::zeros(n, d);
        for i in 0..n {
            self.sample_into(rng, m.row_mut(i));
        }
        m
    }

    /// Marginal distribution of the features in `idx`.
    pub fn marginal(&self, idx: &[usize]) -> Result<GaussianModel> {
        let mean = idx.iter().map(|&i| self.mean[i]).collect();
        GaussianModel::new(mean, self.cov.submatrix(idx))
    }

    /// Pre-compute conditioning on the features in `observed`.
    pub fn conditioner(&self, observed: &[usize]) -> Result<Conditioner> {
        Conditioner::new(self, observed)
    }

    /// Distribution of the unobserved features given `x_obs` on `observed`.
    pub fn condition(&self, observed: &[usize], x_obs: &[f64]) -> Result<Conditional> {
        let c = self.conditioner(observed)?;
        let mean = c.conditional_mean(x_obs)?;
        let gaussian = match &c.cov {
            Some(cov) => Some(GaussianModel::new(mean, cov.clone())?),
            None => None,
        };
        Ok(Conditional {
            gaussian,
            hidden: c.hidden.clone(),
            rank_deficient: c.rank_deficient,
        })
    }

    /// `M = sqrt(lambda_max(Sigma^-1) - lambda_min(Sigma^-1)) / 2`, or
    /// infinity when `Sigma` is singular.
    pub fn tv_constant(&self) -> f64 {
        let max = self.eigenvalues[0];
        let min = *self.eigenvalues.last().unwrap();
        if min == 0.0 {
            return f64::INFINITY;
        }
        0.5 * (1.0 / min - 1.0 / max).max(0.0).sqrt()
    }
}

/// Result of [`GaussianModel::condition`].
#[derive(Debug, Clone)]
pub struct Conditional {
    /// Distribution over `hidden`; `None` when every feature is observed.
    pub gaussian: Option<GaussianModel>,
    pub hidden: Vec<usize>,
    /// `Sigma_SS` was singular and a pseudo-inverse was used.
    pub rank_deficient: bool,
}

/// Conditioning on a fixed set of observed features, reusable across values.
///
/// `mean(x_S) = mu_H + K (x_S - mu_S)` with gain `K = Sigma_HS Sigma_SS^+`.
#[derive(Debug, Clone)]
pub struct Conditioner {
    observed: Vec<usize>,
    hidden: Vec<usize>,
    mean_obs: Vec<f64>,
    mean_hidden: Vec<f64>,
    gain: Matrix,
    cov: Option<SymMatrix>,
    sampler: Option<GaussianModel>,
    rank_deficient: bool,
}

impl Conditioner {
    fn new(g: &GaussianModel, observed: &[usize]) -> Result<Self> {
        let d = g.dim();
        let mut is_obs = vec![false; d];
        for &i in observed {
            if i >= d || is_obs[i] {
                return Err(Error::InvalidParameter(format!(
                    "observed index {i} is out of range or repeated"
                )));
            }
            is_obs[i] = true;
        }
        let hidden: Vec<usize> = (0..d).filter(|&i| !is_obs[i]).collect();
        let observed = observed.to_vec();
        let mean_obs: Vec<f64> = observed.iter().map(|&i| g.mean[i]).collect();
        let mean_hidden: Vec<f64> = hidden.iter().map(|&i| g.mean[i]).collect();
        let (h, s) = (hidden.len(), observed.len());

        if h == 0 {
            return Ok(Self {
                observed,
                hidden,
                mean_obs,
                mean_hidden,
                gain: Matrix::zeros(0, s),
                cov: None,
                sampler: None,
                rank_deficient: false,
            });
        }
        let sigma_hh = g.cov.submatrix(&hidden);
        if s == 0 {
            let sampler = GaussianModel::new(vec![0.0; h], sigma_hh.clone())?;
            return Ok(Self {
                observed,
                hidden,
                mean_obs,
                mean_hidden,
                gain: Matrix::zeros(h, 0),
                cov: Some(sigma_hh),
                sampler: Some(sampler),
                rank_deficient: false,
            });
        }

        // pseudo-inverse of Sigma_SS through its clamped eigendecomposition
        let eig = sym_eigen(&g.cov.submatrix(&observed))?;
        let tol = clamp_threshold(&eig.values);
        let mut pinv = Matrix::zeros(s, s);
        let mut rank_deficient = false;
        for k in 0..s {
            let lam = eig.values[k];
            if lam <= tol {
                rank_deficient = true;
                continue;
            }
            for a in 0..s {
                let va = eig.vectors[(a, k)] / lam;
                for b in 0..s {
                    pinv[(a, b)] += va * eig.vectors[(b, k)];
                }
            }
        }
        let sigma_hs = g.cov.block(&hidden, &observed);
        let gain = sigma_hs.matmul(&pinv)?;
        let explained = gain.matmul(&sigma_hs.transpose())?;
        let mut cov = sigma_hh.to_matrix();
        for a in 0..h {
            for b in 0..h {
                cov[(a, b)] -= explained[(a, b)];
            }
        }
        let cov = clamp_psd(&SymMatrix::symmetrize(&cov)?)?;
        let sampler = GaussianModel::new(vec![0.0; h], cov.clone())?;
        Ok(Self {
            observed,
            hidden,
            mean_obs,
            mean_hidden,
            gain,
            cov: Some(cov),
            sampler: Some(sampler),
            rank_deficient,
        })
    }

    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    pub fn rank_deficient(&self) -> bool {
        self.rank_deficient
    }

    /// Conditional covariance of the hidden features (`None` if none hidden).
    pub fn covariance(&self) -> Option<&SymMatrix> {
        self.cov.as_ref()
    }

    pub fn conditional_mean(&self, x_obs: &[f64]) -> Result<Vec<f64>> {
        if x_obs.len() != self.observed.len() {
            return Err(Error::DimensionMismatch {
                expected: self.observed.len(),
                actual: x_obs.len(),
                context: "observed values",
            });
        }
        let centered: Vec<f64> = x_obs.iter().zip(&self.mean_obs).map(|(x, m)| x - m).collect();
        let shift = if self.observed.is_empty() {
            vec![0.0; self.hidden.len()]
        } else {
            self.gain.matvec(&centered)?
        };
        Ok(self.mean_hidden.iter().zip(shift).map(|(m, s)| m + s).collect())
    }

    /// Conditional mean computed from a full-length input `x`.
    pub fn conditional_mean_from(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x_obs: Vec<f64> = self.observed.iter().map(|&i| x[i]).collect();
        self.conditional_mean(&x_obs)
    }

    /// One draw of the hidden features given the conditional mean `mean`.
    pub fn sample_hidden(&self, mean: &[f64], rng: &mut Rng, out: &mut [f64]) {
        match &self.sampler {
            Some(s) => {
                s.sample_into(rng, out);
                for (o, m) in out.iter_mut().zip(mean) {
                    *o += m;
                }
            }
            None => {}
        }
    }
}

fn clamp_psd(m: &SymMatrix) -> Result<SymMatrix> {
    let eig = sym_eigen(m)?;
    let tol = clamp_threshold(&eig.values);
    if eig.values.iter().all(|&v| v >= 0.0) {
        return Ok(m.clone());
    }
    let n = m.dim();
    let mut out = Matrix::zeros(n, n);
    for k in 0..n {
        let lam = if eig.values[k] <= tol { 0.0 } else { eig.values[k] };
        if lam == 0.0 {
            continue;
        }
        for a in 0..n {
            for b in 0..n {
                out[(a, b)] += lam * eig.vectors[(a, k)] * eig.vectors[(b, k)];
            }
        }
    }
    SymMatrix::symmetrize(&out)
}

/// Total-variation distance between `N(mu1, sigma^2)` and `N(mu2, sigma^2)`.
pub fn tv_gaussian_1d(mu1: f64, mu2: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "standard deviation must be positive, got {sigma}"
        )));
    }
    Ok(2.0 * std_normal_cdf((mu1 - mu2).abs() / (2.0 * sigma)) - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(rho: f64) -> GaussianModel {
        GaussianModel::correlated_pair(2, rho).unwrap()
    }

    #[test]
    fn point_mass_sampling() {
        let g = GaussianModel::new(vec![1.0, -2.0], SymMatrix::diagonal(&[0.0, 0.0])).unwrap();
        let s = g.sample(20, &mut Rng::new(0, 0));
        for i in 0..20 {
            assert_eq!(s.row(i), &[1.0, -2.0]);
        }
    }

    #[test]
    fn perfectly_correlated_samples_lie_on_diagonal() {
        let s = pair(1.0).sample(1000, &mut Rng::new(1, 0));
        for i in 0..1000 {
            assert!((s[(i, 0)] - s[(i, 1)]).abs() <= 1e-12);
        }
    }

    #[test]
    fn univariate_moments() {
        let g = GaussianModel::new(vec![0.3], SymMatrix::identity(1)).unwrap();
        let s = g.sample(100_000, &mut Rng::new(2, 0));
        let v = s.column(0);
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        assert!((m - 0.3).abs() < 0.02);
        assert!((var - 1.0).abs() < 0.05);
    }

    #[test]
    fn rejects_indefinite_covariance() {
        let cov = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(GaussianModel::new(vec![0.0; 2], cov).is_err());
    }

    #[test]
    fn independent_conditioning_is_marginal() {
        let g = GaussianModel::new(vec![1.0, 2.0, 3.0], SymMatrix::diagonal(&[1.0, 4.0, 9.0]))
            .unwrap();
        for c in [-3.0, 0.0, 5.0] {
            let cond = g.condition(&[1], &[c]).unwrap();
            let cg = cond.gaussian.unwrap();
            assert_eq!(cond.hidden, vec![0, 2]);
            assert_eq!(cg.mean(), &[1.0, 3.0]);
            assert_eq!(cg.covariance().as_slice(), &[1.0, 0.0, 0.0, 9.0]);
            assert!(!cond.rank_deficient);
        }
    }

    #[test]
    fn bivariate_conditioning_formula() {
        for rho in [0.0, 0.3, 0.8] {
            let cond = pair(rho).condition(&[1], &[1.7]).unwrap();
            let cg = cond.gaussian.unwrap();
            assert!((cg.mean()[0] - rho * 1.7).abs() < 1e-14);
            assert!((cg.covariance().get(0, 0) - (1.0 - rho * rho)).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_conditioning_is_point_mass() {
        let g = GaussianModel::correlated_pair(3, 1.0).unwrap();
        let cond = g.condition(&[1], &[0.9]).unwrap();
        let cg = cond.gaussian.unwrap();
        assert!((cg.mean()[0] - 0.9).abs() < 1e-12);
        assert!(cg.covariance().get(0, 0).abs() < 1e-12);
        assert!((cg.covariance().get(1, 1) - 1.0).abs() < 1e-12);

        // conditioning on both copies is rank deficient
        let both = g.condition(&[0, 1], &[0.9, 0.9]).unwrap();
        assert!(both.rank_deficient);
        assert_eq!(both.gaussian.unwrap().mean(), &[0.0]);
    }

    #[test]
    fn tv_constant_examples() {
        assert_eq!(GaussianModel::standard(4).unwrap().tv_constant(), 0.0);
        assert!((pair(0.5).tv_constant() - 0.5 * (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((pair(0.5).tv_constant() - 0.57735).abs() < 1e-5);
        assert_eq!(pair(1.0).tv_constant(), f64::INFINITY);
    }

    #[test]
    fn tv_1d_examples() {
        assert_eq!(tv_gaussian_1d(0.3, 0.3, 1.0).unwrap(), 0.0);
        assert!((tv_gaussian_1d(0.0, 2.0, 1.0).unwrap() - 0.682689492137).abs() < 1e-9);
        assert!((tv_gaussian_1d(0.0, 1e3, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(tv_gaussian_1d(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn conditional_tv_respects_m() {
        let mut rng = Rng::new(5, 0);
        for rho in [0.0, 0.25, 0.5, 0.75] {
            let g = pair(rho);
            let m = g.tv_constant();
            for _ in 0..200 {
                let a = 3.0 * rng.normal();
                let b = 3.0 * rng.normal();
                let ca = g.condition(&[1], &[a]).unwrap().gaussian.unwrap();
                let cb = g.condition(&[1], &[b]).unwrap().gaussian.unwrap();
                let sd = ca.covariance().get(0, 0).sqrt();
                let tv = tv_gaussian_1d(ca.mean()[0], cb.mean()[0], sd).unwrap();
                assert!(tv <= m * (a - b).abs() + 1e-12, "rho {rho}: {tv} > {m}*|{a}-{b}|");
            }
        }
    }

    #[test]
    fn conditioning_recovers_marginal_moments() {
        // draw x_S from its marginal, then x_H | x_S; the pooled x_H must have
        // the joint's marginal moments
        let cov = SymMatrix::from_rows(&[
            vec![1.0, 0.5, 0.2],
            vec![0.5, 2.0, -0.3],
            vec![0.2, -0.3, 1.5],
        ])
        .unwrap();
        let g = GaussianModel::new(vec![0.5, -1.0, 2.0], cov).unwrap();
        let c = g.conditioner(&[0]).unwrap();
        let marg = g.marginal(&[0]).unwrap();
        let mut rng = Rng::new(9, 0);
        let n = 40_000;
        let mut sums = [0.0; 2];
        let mut sq = [0.0; 2];
        let mut xs = [0.0];
        let mut xh = [0.0; 2];
        for _ in 0..n {
            marg.sample_into(&mut rng, &mut xs);
            let mean = c.conditional_mean(&xs).unwrap();
            c.sample_hidden(&mean, &mut rng, &mut xh);
            for k in 0..2 {
                sums[k] += xh[k];
                sq[k] += xh[k] * xh[k];
            }
        }
        let expect_mean = [-1.0, 2.0];
        let expect_var = [2.0, 1.5];
        for k in 0..2 {
            let m = sums[k] / n as f64;
            let v = sq[k] / n as f64 - m * m;
            assert!((m - expect_mean[k]).abs() < 0.04, "mean {k}: {m}");
            assert!((v - expect_var[k]).abs() < 0.08, "var {k}: {v}");
        }
    }
}
