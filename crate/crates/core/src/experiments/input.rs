use super::{attributions, directions, join, l2_distance, par_map, Cell, PerturbationGrid, ResultTable};
use crate::bounds::{input_bound, RobustnessCertificate};
use crate::data::{generate_synthetic, GaussianModel, SyntheticSpec};
use crate::error::{Error, Result};
use crate::models::{glm_lipschitz, train_glm, GeneralizedLinearModel, Link, Model, TrainConfig};
use crate::numerics::{fit_line, r_squared, LineFit, Rng};
use crate::removal::{RemovalKind, RemovalMode, RemovalStrategy};
use crate::summary::{build_operator, SummaryKind, SummaryOperator};

/// Logistic regression on correlated Gaussian data, attributions compared
/// before and after random input perturbations of growing norm.
#[derive(Debug, Clone, PartialEq)]
pub struct InputPerturbConfig {
    /// Correlation between the first two features; one run per value.
    pub rhos: Vec<f64>,
    /// Factors applied to the trained coefficients; one run per value.
    pub alphas: Vec<f64>,
    pub removals: Vec<RemovalKind>,
    pub summaries: Vec<SummaryKind>,
    /// Mode for marginal and conditional removal (baseline is always exact).
    pub mode: RemovalMode,
    /// Link of the trained model: logistic regression or a linear
    /// probability model.
    pub link: Link,
    pub train_size: usize,
    pub explicands: usize,
    pub grid: PerturbationGrid,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for InputPerturbConfig {
    fn default() -> Self {
        Self {
            rhos: vec![0.5],
            alphas: vec![1.0],
            removals: RemovalKind::ALL.to_vec(),
            summaries: default_summaries(),
            mode: RemovalMode::Exact,
            link: Link::Sigmoid,
            train_size: 500,
            explicands: 50,
            grid: PerturbationGrid::default(),
            learning_rate: 1.0,
            epochs: 500,
            seed: 0,
            workers: 1,
        }
    }
}

pub(crate) fn default_summaries() -> Vec<SummaryKind> {
    vec![
        SummaryKind::LeaveOneOut,
        SummaryKind::Shapley,
        SummaryKind::Banzhaf,
        SummaryKind::Rise,
    ]
}

pub(crate) fn mode_string(mode: RemovalMode) -> String {
    match mode {
        RemovalMode::Exact => "exact".into(),
        RemovalMode::Sampled(m) => format!("sampled:{m}"),
    }
}

pub(crate) fn link_string(link: Link) -> &'static str {
    match link {
        Link::Identity => "identity",
        Link::Sigmoid => "sigmoid",
    }
}

pub(crate) fn kinds_string(kinds: &[SummaryKind]) -> String {
    kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join(",")
}

pub(crate) fn removals_string(kinds: &[RemovalKind]) -> String {
    kinds.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(",")
}

impl InputPerturbConfig {
    /// Key/value lines identifying the run (the worker count is excluded:
    /// it never changes the output).
    pub fn describe(&self) -> Vec<(String, String)> {
        vec![
            ("rhos".into(), join(&self.rhos)),
            ("alphas".into(), join(&self.alphas)),
            ("removals".into(), removals_string(&self.removals)),
            ("summaries".into(), kinds_string(&self.summaries)),
            ("mode".into(), mode_string(self.mode)),
            ("link".into(), link_string(self.link).into()),
            ("train_size".into(), self.train_size.to_string()),
            ("explicands".into(), self.explicands.to_string()),
            ("norms".into(), join(self.grid.norms())),
            ("perturbations".into(), self.grid.perturbations().to_string()),
            ("learning_rate".into(), self.learning_rate.to_string()),
            ("epochs".into(), self.epochs.to_string()),
        ]
    }

    fn validate(&self) -> Result<()> {
        if self.rhos.is_empty() || self.alphas.is_empty() {
            return Err(Error::InvalidParameter("need at least one rho and one alpha".into()));
        }
        if self.removals.is_empty() || self.summaries.is_empty() {
            return Err(Error::InvalidParameter(
                "need at least one removal kind and one summary kind".into(),
            ));
        }
        if self.explicands == 0 {
            return Err(Error::InvalidParameter("need at least one explicand".into()));
        }
        if self.alphas.iter().any(|&a| !(a >= 0.0 && a.is_finite())) {
            return Err(Error::InvalidParameter("alphas must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Removal strategy over a Gaussian feature distribution; the baseline is
/// the distribution mean.
pub(crate) fn gaussian_strategy(
    kind: RemovalKind,
    g: &GaussianModel,
    mode: RemovalMode,
) -> Result<RemovalStrategy> {
    match kind {
        RemovalKind::Baseline => Ok(RemovalStrategy::baseline(g.mean().to_vec())),
        RemovalKind::Marginal => RemovalStrategy::marginal_gaussian(g.clone(), mode),
        RemovalKind::Conditional => RemovalStrategy::conditional(g.clone(), mode),
    }
}

/// Per-norm statistics for one (rho, alpha, removal, summary) cell.
pub(crate) struct Curve {
    pub rho: f64,
    pub alpha: f64,
    pub removal: RemovalKind,
    pub summary: String,
    pub mean: Vec<f64>,
    pub max: Vec<f64>,
    pub bound: Vec<f64>,
    pub fit: LineFit,
    pub theory_slope: f64,
    /// The certificate applies to these numbers (exact prediction vectors).
    pub certified: bool,
}

fn train(cfg: &InputPerturbConfig, spec: &SyntheticSpec, rng: &Rng) -> Result<GeneralizedLinearModel> {
    let data = generate_synthetic(spec, rng)?;
    let labels = data.labels().ok_or(Error::NoData)?;
    let tc = TrainConfig::new(cfg.learning_rate, cfg.epochs, 0.0, data.n(), cfg.seed)?;
    train_glm(data.rows(), labels, cfg.link, &tc)
}

pub(crate) fn run_curves(cfg: &InputPerturbConfig) -> Result<Vec<Curve>> {
    cfg.validate()?;
    let root = Rng::new(cfg.seed, 0);
    let norms = cfg.grid.norms();
    let per_norm = cfg.grid.perturbations();
    let mut curves = Vec::new();
    for &rho in &cfg.rhos {
        let rr = root.derive(rho.to_bits());
        let spec = SyntheticSpec::new(rho, cfg.train_size)?;
        let glm = train(cfg, &spec, &rr.derive(0))?;
        let gauss = spec.gaussian()?;
        let d = gauss.dim();
        let xs = gauss.sample(cfg.explicands, &mut rr.derive(1));
        let ops: Vec<SummaryOperator> = cfg
            .summaries
            .iter()
            .map(|k| build_operator(k, d))
            .collect::<Result<_>>()?;
        let m_const = gauss.tv_constant();
        for &alpha in &cfg.alphas {
            let model = glm.scaled(alpha);
            let l = glm_lipschitz(&model);
            let b = model.output_bound().unwrap_or(f64::INFINITY);
            for &removal in &cfg.removals {
                let mode = match removal {
                    RemovalKind::Baseline => RemovalMode::Exact,
                    _ => cfg.mode,
                };
                let strat = gaussian_strategy(removal, &gauss, mode)?;
                // diffs[e][summary][norm * per_norm + p]
                let diffs = par_map(cfg.explicands, cfg.workers, |e| {
                    let x = xs.row(e);
                    let base = attributions(&model, x, &strat, &ops, &rr.derive(3).derive(e as u64))?;
                    let mut out = vec![vec![0.0; norms.len() * per_norm]; ops.len()];
                    let dirs = directions(x.len(), per_norm, &rr.derive(2).derive(e as u64));
                    for (k, &r) in norms.iter().enumerate() {
                        for (p, u) in dirs.iter().enumerate() {
                            let idx = (k * per_norm + p) as u64;
                            let xp: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + r * b).collect();
                            let phi = attributions(
                                &model,
                                &xp,
                                &strat,
                                &ops,
                                &rr.derive(4).derive(e as u64).derive(idx),
                            )?;
                            for s in 0..ops.len() {
                                out[s][idx as usize] = l2_distance(&base[s], &phi[s]);
                            }
                        }
                    }
                    Ok(out)
                })?;
                for (s, op) in ops.iter().enumerate() {
                    let cert = RobustnessCertificate::for_operator(removal, op, l, b, m_const)?;
                    let mut mean = Vec::with_capacity(norms.len());
                    let mut max = Vec::with_capacity(norms.len());
                    for k in 0..norms.len() {
                        let vals = diffs
                            .iter()
                            .flat_map(|per_e| &per_e[s][k * per_norm..(k + 1) * per_norm]);
                        let (sum, hi, n) = vals.fold((0.0, 0.0f64, 0usize), |(a, m, n), &v| {
                            (a + v, m.max(v), n + 1)
                        });
                        mean.push(sum / n as f64);
                        max.push(hi);
                    }
                    let points: Vec<(f64, f64)> =
                        norms.iter().copied().zip(max.iter().copied()).collect();
                    let fit = if points.len() >= 2 {
                        fit_line(&points)?
                    } else {
                        LineFit {
                            slope: max[0] / norms[0],
                            intercept: 0.0,
                        }
                    };
                    curves.push(Curve {
                        rho,
                        alpha,
                        removal,
                        summary: op.kind().name().to_string(),
                        bound: norms.iter().map(|&r| input_bound(&cert, r)).collect(),
                        mean,
                        max,
                        fit,
                        theory_slope: cert.slope(),
                        certified: mode == RemovalMode::Exact,
                    });
                }
            }
        }
    }
    Ok(curves)
}

fn label(removal: RemovalKind, summary: &str) -> String {
    format!("{}/{summary}", removal.as_str())
}

/// Distinct (removal, summary) pairs in first-seen order.
fn groups(curves: &[Curve]) -> Vec<(RemovalKind, String)> {
    let mut out: Vec<(RemovalKind, String)> = Vec::new();
    for c in curves {
        if !out.iter().any(|(r, s)| *r == c.removal && *s == c.summary) {
            out.push((c.removal, c.summary.clone()));
        }
    }
    out
}

/// Input-perturbation study.
///
/// Rows: one per (rho, alpha, removal, summary, norm) with the mean and
/// maximum attribution difference over all explicand/perturbation pairs and
/// the certified bound. Summary rows: least-squares line through the
/// per-norm maxima next to the theoretical slope `g * h`.
///
/// Checks, with exact removal: every maximum is within the certificate and
/// every empirical slope is at most `g * h`. With three or more alphas the
/// empirical slope must be linear in alpha (R^2 >= 0.95). With two or more
/// rhos the conditional-removal slope must be nondecreasing in rho.
pub fn exp_input_perturbation(cfg: &InputPerturbConfig) -> Result<ResultTable> {
    let curves = run_curves(cfg)?;
    let mut t = ResultTable::new(
        "input-perturb",
        &["rho", "alpha", "removal", "summary", "norm", "mean_diff", "max_diff", "bound"],
        &[
            "rho",
            "alpha",
            "removal",
            "summary",
            "empirical_slope",
            "empirical_intercept",
            "theoretical_slope",
        ],
    );
    for c in &curves {
        for (k, &r) in cfg.grid.norms().iter().enumerate() {
            t.push_row(vec![
                c.rho.into(),
                c.alpha.into(),
                c.removal.as_str().into(),
                c.summary.as_str().into(),
                r.into(),
                c.mean[k].into(),
                c.max[k].into(),
                c.bound[k].into(),
            ])?;
        }
        t.push_summary(vec![
            c.rho.into(),
            c.alpha.into(),
            c.removal.as_str().into(),
            c.summary.as_str().into(),
            c.fit.slope.into(),
            c.fit.intercept.into(),
            c.theory_slope.into(),
        ])?;
    }

    for (removal, summary) in groups(&curves) {
        let mine: Vec<&Curve> = curves
            .iter()
            .filter(|c| c.removal == removal && c.summary == summary)
            .collect();
        let name = label(removal, &summary);
        if mine.iter().all(|c| c.certified) {
            let worst = mine
                .iter()
                .flat_map(|c| c.max.iter().zip(&c.bound))
                .map(|(m, b)| if *b == 0.0 { if *m == 0.0 { 0.0 } else { f64::INFINITY } } else { m / b })
                .fold(0.0f64, f64::max);
            t.check(
                format!("certificate dominates max diff [{name}]"),
                worst <= 1.0,
                format!("largest max_diff / bound = {worst:.4}"),
            );
            let slope_ratio = mine
                .iter()
                .map(|c| if c.theory_slope == 0.0 { 0.0 } else { c.fit.slope / c.theory_slope })
                .fold(f64::NEG_INFINITY, f64::max);
            t.check(
                format!("empirical slope within g*h [{name}]"),
                slope_ratio <= 1.0,
                format!("largest empirical / theoretical slope = {slope_ratio:.4}"),
            );
        }
        if cfg.alphas.len() >= 3 {
            let mut worst = f64::INFINITY;
            for &rho in &cfg.rhos {
                let points: Vec<(f64, f64)> = mine
                    .iter()
                    .filter(|c| c.rho == rho)
                    .map(|c| (c.alpha, c.fit.slope))
                    .collect();
                worst = worst.min(r_squared(&points)?);
            }
            t.check(
                format!("empirical slope linear in alpha [{name}]"),
                worst >= 0.95,
                format!("smallest R^2 over rho = {worst:.4}"),
            );
        }
        if removal == RemovalKind::Conditional && cfg.rhos.len() >= 2 {
            let mut ok = true;
            let mut detail = Vec::new();
            for &alpha in &cfg.alphas {
                let mut pts: Vec<(f64, f64)> = mine
                    .iter()
                    .filter(|c| c.alpha == alpha)
                    .map(|c| (c.rho, c.fit.slope))
                    .collect();
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                ok &= pts.windows(2).all(|w| w[1].1 >= w[0].1);
                detail.push(
                    pts.iter()
                        .map(|(r, s)| format!("{r}:{s:.4}"))
                        .collect::<Vec<_>>()
                        .join(" "),
                );
            }
            t.check(
                format!("conditional slope nondecreasing in rho [{name}]"),
                ok,
                format!("rho:slope {}", detail.join(" | ")),
            );
        }
    }
    t.set_provenance(cfg.seed, &cfg.describe());
    Ok(t)
}

/// Input-perturbation study repeated over removal sample sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingConfig {
    pub rho: f64,
    pub sample_sizes: Vec<usize>,
    pub removals: Vec<RemovalKind>,
    pub summaries: Vec<SummaryKind>,
    pub link: Link,
    pub train_size: usize,
    pub explicands: usize,
    pub grid: PerturbationGrid,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            rho: 0.5,
            sample_sizes: vec![250, 1000, 4000],
            removals: RemovalKind::ALL.to_vec(),
            summaries: vec![SummaryKind::Shapley],
            link: Link::Identity,
            train_size: 500,
            explicands: 10,
            grid: PerturbationGrid::evenly_spaced(10, 2.0, 5).expect("valid grid"),
            learning_rate: 1.0,
            epochs: 500,
            seed: 0,
            workers: 1,
        }
    }
}

impl SamplingConfig {
    pub fn describe(&self) -> Vec<(String, String)> {
        vec![
            ("rho".into(), self.rho.to_string()),
            ("sample_sizes".into(), join(&self.sample_sizes)),
            ("removals".into(), removals_string(&self.removals)),
            ("summaries".into(), kinds_string(&self.summaries)),
            ("link".into(), link_string(self.link).into()),
            ("train_size".into(), self.train_size.to_string()),
            ("explicands".into(), self.explicands.to_string()),
            ("norms".into(), join(self.grid.norms())),
            ("perturbations".into(), self.grid.perturbations().to_string()),
            ("learning_rate".into(), self.learning_rate.to_string()),
            ("epochs".into(), self.epochs.to_string()),
        ]
    }

    fn input_config(&self, m: usize) -> InputPerturbConfig {
        InputPerturbConfig {
            rhos: vec![self.rho],
            alphas: vec![1.0],
            removals: self.removals.clone(),
            summaries: self.summaries.clone(),
            mode: RemovalMode::Sampled(m),
            link: self.link,
            train_size: self.train_size,
            explicands: self.explicands,
            grid: self.grid.clone(),
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            seed: self.seed,
            workers: self.workers,
        }
    }
}

/// Sampling study: intercept and slope of the empirical bound per sample
/// size `m`.
///
/// The prediction vectors of `x` and `x'` use independent sampling streams,
/// so Monte-Carlo error shows up as a positive intercept. Checks: the
/// baseline intercept is at most 1e-9 at every `m`; marginal and conditional
/// intercepts are nonincreasing in `m`; and each slope varies by at most 20%
/// across `m` (`(max - min) / min <= 0.2`).
pub fn exp_sampling(cfg: &SamplingConfig) -> Result<ResultTable> {
    if cfg.sample_sizes.is_empty() || cfg.sample_sizes.contains(&0) {
        return Err(Error::InvalidParameter("sample sizes must be positive".into()));
    }
    let mut sizes = cfg.sample_sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let mut t = ResultTable::new(
        "sampling",
        &["m", "removal", "summary", "intercept", "slope", "theoretical_slope"],
        &["removal", "summary", "min_slope", "max_slope", "slope_spread"],
    );
    // results[m index] = curves
    let results: Vec<Vec<Curve>> = sizes
        .iter()
        .map(|&m| run_curves(&cfg.input_config(m)))
        .collect::<Result<_>>()?;
    for (&m, curves) in sizes.iter().zip(&results) {
        for c in curves {
            t.push_row(vec![
                m.into(),
                c.removal.as_str().into(),
                c.summary.as_str().into(),
                c.fit.intercept.into(),
                c.fit.slope.into(),
                c.theory_slope.into(),
            ])?;
        }
    }
    for (removal, summary) in groups(&results[0]) {
        let series: Vec<&Curve> = results
            .iter()
            .map(|cs| {
                cs.iter()
                    .find(|c| c.removal == removal && c.summary == summary)
                    .expect("every run covers the same cells")
            })
            .collect();
        let name = label(removal, &summary);
        let intercepts: Vec<f64> = series.iter().map(|c| c.fit.intercept).collect();
        let listing = sizes
            .iter()
            .zip(&intercepts)
            .map(|(m, i)| format!("{m}:{i:.3e}"))
            .collect::<Vec<_>>()
            .join(" ");
        if removal == RemovalKind::Baseline {
            let hi = intercepts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            t.check(
                format!("baseline intercept vanishes [{name}]"),
                hi <= 1e-9,
                format!("m:intercept {listing}"),
            );
        } else {
            t.check(
                format!("intercept nonincreasing in m [{name}]"),
                intercepts.windows(2).all(|w| w[1] <= w[0]),
                format!("m:intercept {listing}"),
            );
        }
        let slopes: Vec<f64> = series.iter().map(|c| c.fit.slope).collect();
        let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let spread = (hi - lo) / lo;
        t.push_summary(vec![
            removal.as_str().into(),
            summary.as_str().into(),
            lo.into(),
            hi.into(),
            Cell::Real(spread),
        ])?;
        t.check(
            format!("slope stable across m [{name}]"),
            spread <= 0.2,
            format!("(max - min) / min = {spread:.4}"),
        );
    }
    t.set_provenance(cfg.seed, &cfg.describe());
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> InputPerturbConfig {
        InputPerturbConfig {
            explicands: 4,
            grid: PerturbationGrid::evenly_spaced(4, 1.0, 3).unwrap(),
            epochs: 100,
            summaries: vec![SummaryKind::Shapley, SummaryKind::Rise],
            ..InputPerturbConfig::default()
        }
    }

    #[test]
    fn table_shape_and_checks() {
        let t = exp_input_perturbation(&small()).unwrap();
        // 3 removals x 2 summaries x 4 norms
        assert_eq!(t.rows().len(), 24);
        assert_eq!(t.summary().len(), 6);
        assert_eq!(t.checks().len(), 12);
        assert!(t.passed(), "{:?}", t.checks());
    }

    #[test]
    fn bound_column_dominates() {
        let t = exp_input_perturbation(&small()).unwrap();
        let max = t.column_values("max_diff").unwrap();
        let bound = t.column_values("bound").unwrap();
        assert!(max.iter().zip(&bound).all(|(m, b)| m <= b));
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let a = exp_input_perturbation(&small()).unwrap();
        let b = exp_input_perturbation(&InputPerturbConfig { workers: 3, ..small() }).unwrap();
        assert_eq!(a.to_csv_string().unwrap(), b.to_csv_string().unwrap());
    }

    #[test]
    fn zero_alpha_gives_zero_differences() {
        let t = exp_input_perturbation(&InputPerturbConfig { alphas: vec![0.0], ..small() }).unwrap();
        assert!(t.column_values("max_diff").unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_lists_are_rejected() {
        assert!(exp_input_perturbation(&InputPerturbConfig { rhos: vec![], ..small() }).is_err());
        assert!(exp_input_perturbation(&InputPerturbConfig { summaries: vec![], ..small() }).is_err());
    }
}
