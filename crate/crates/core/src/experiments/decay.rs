use std::path::PathBuf;
use std::sync::Arc;

use super::input::{kinds_string, removals_string};
use super::{attributions, directions, join, l2_distance, par_map, PerturbationGrid, ResultTable};
use crate::data::{generate_synthetic, load_csv, Dataset, GaussianModel, SyntheticSpec};
use crate::error::{Error, Result};
use crate::models::{train_mlp, MlpModel, OutputActivation, TrainConfig};
use crate::numerics::{spearman, Rng};
use crate::removal::{RemovalKind, RemovalMode, RemovalStrategy};
use crate::summary::{build_operator, SummaryKind, SummaryOperator};

/// Training data for the network experiments.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// [`generate_synthetic`] with the default coefficients.
    Synthetic { rho: f64, n: usize },
    /// A CSV file with a header row and a binary label column.
    Csv { path: PathBuf, label: String },
}

impl DataSource {
    pub(crate) fn describe(&self) -> String {
        match self {
            Self::Synthetic { rho, n } => format!("synthetic(rho={rho},n={n})"),
            Self::Csv { path, label } => format!("csv({},label={label})", path.display()),
        }
    }

    /// The dataset and, for synthetic data, its generating distribution.
    pub(crate) fn load(&self, rng: &Rng) -> Result<(Dataset, Option<GaussianModel>)> {
        match self {
            Self::Synthetic { rho, n } => {
                let spec = SyntheticSpec::new(*rho, *n)?;
                Ok((generate_synthetic(&spec, rng)?, Some(spec.gaussian()?)))
            }
            Self::Csv { path, label } => Ok((load_csv(path, Some(label))?, None)),
        }
    }
}

/// Removal rule for a network trained on `data`: baseline at the column
/// means, marginal over the first `background` rows, conditional by
/// sampling `samples` draws from the generating Gaussian.
pub(crate) fn network_strategy(
    kind: RemovalKind,
    data: &Dataset,
    gauss: Option<&GaussianModel>,
    background: usize,
    samples: usize,
) -> Result<RemovalStrategy> {
    match kind {
        RemovalKind::Baseline => Ok(RemovalStrategy::baseline(data.column_means())),
        RemovalKind::Marginal => {
            RemovalStrategy::marginal_dataset(Arc::new(data.head(background)), RemovalMode::Exact)
        }
        RemovalKind::Conditional => match gauss {
            Some(g) => RemovalStrategy::conditional(g.clone(), RemovalMode::Sampled(samples)),
            None => Err(Error::InvalidParameter(
                "conditional removal for networks needs synthetic Gaussian data".into(),
            )),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightDecayConfig {
    pub data: DataSource,
    /// Weight-decay values, one network each.
    pub decays: Vec<f64>,
    pub hidden: Vec<usize>,
    pub removals: Vec<RemovalKind>,
    pub summaries: Vec<SummaryKind>,
    pub grid: PerturbationGrid,
    pub explicands: usize,
    /// Rows averaged over by marginal removal.
    pub background: usize,
    /// Draws per subset for conditional removal.
    pub conditional_samples: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for WeightDecayConfig {
    fn default() -> Self {
        Self {
            data: DataSource::Synthetic { rho: 0.5, n: 500 },
            decays: vec![0.0, 0.001, 0.0025, 0.005, 0.01],
            hidden: vec![16, 16],
            removals: vec![RemovalKind::Baseline],
            summaries: vec![SummaryKind::Shapley],
            grid: PerturbationGrid::new(vec![0.1, 0.5, 1.0, 2.0], 10).expect("valid grid"),
            explicands: 20,
            background: 50,
            conditional_samples: 100,
            learning_rate: 0.1,
            epochs: 100,
            batch_size: 32,
            seed: 0,
            workers: 1,
        }
    }
}

impl WeightDecayConfig {
    pub fn describe(&self) -> Vec<(String, String)> {
        vec![
            ("data".into(), self.data.describe()),
            ("decays".into(), join(&self.decays)),
            ("hidden".into(), join(&self.hidden)),
            ("removals".into(), removals_string(&self.removals)),
            ("summaries".into(), kinds_string(&self.summaries)),
            ("norms".into(), join(self.grid.norms())),
            ("perturbations".into(), self.grid.perturbations().to_string()),
            ("explicands".into(), self.explicands.to_string()),
            ("background".into(), self.background.to_string()),
            ("conditional_samples".into(), self.conditional_samples.to_string()),
            ("learning_rate".into(), self.learning_rate.to_string()),
            ("epochs".into(), self.epochs.to_string()),
            ("batch_size".into(), self.batch_size.to_string()),
        ]
    }
}

/// Weight-decay study: one network per decay value (same seed), attribution
/// differences under random input perturbations.
///
/// Rows: (removal, summary, decay, norm) with the mean difference and the
/// network's Frobenius-norm product. Summary rows (only with two or more
/// decay values): Spearman correlation between decay and mean difference
/// per norm. Checks: that correlation is at most -0.5 at every norm for
/// Shapley with baseline removal, and the Frobenius product strictly
/// decreases with decay.
pub fn exp_weight_decay(cfg: &WeightDecayConfig) -> Result<ResultTable> {
    if cfg.decays.is_empty() || cfg.removals.is_empty() || cfg.summaries.is_empty() {
        return Err(Error::InvalidParameter(
            "need at least one decay, removal kind and summary kind".into(),
        ));
    }
    let root = Rng::new(cfg.seed, 0);
    let (data, gauss) = cfg.data.load(&root.derive(0))?;
    let labels = data.labels().ok_or(Error::NoData)?;
    let d = data.d();
    let n_explain = cfg.explicands.min(data.n());
    if n_explain == 0 {
        return Err(Error::InvalidParameter("need at least one explicand".into()));
    }
    let ops: Vec<SummaryOperator> = cfg
        .summaries
        .iter()
        .map(|k| build_operator(k, d))
        .collect::<Result<_>>()?;
    let mut widths = vec![d];
    widths.extend(&cfg.hidden);
    widths.push(1);
    let train_seed = root.derive(1).next_u64();
    let base_cfg = TrainConfig::new(cfg.learning_rate, cfg.epochs, 0.0, cfg.batch_size, train_seed)?;
    let models: Vec<MlpModel> = cfg
        .decays
        .iter()
        .map(|&wd| {
            train_mlp(
                data.rows(),
                labels,
                &widths,
                OutputActivation::Sigmoid,
                &base_cfg.with_weight_decay(wd)?,
            )
        })
        .collect::<Result<_>>()?;

    let norms = cfg.grid.norms();
    let per_norm = cfg.grid.perturbations();
    let mut t = ResultTable::new(
        "weight-decay",
        &["removal", "summary", "decay", "norm", "mean_diff", "frobenius_product"],
        &["removal", "summary", "norm", "spearman"],
    );
    for &removal in &cfg.removals {
        let strat = network_strategy(removal, &data, gauss.as_ref(), cfg.background, cfg.conditional_samples)?;
        // means[model][summary][norm]
        let mut means = Vec::with_capacity(models.len());
        for model in &models {
            let per_e = par_map(n_explain, cfg.workers, |e| {
                let x = data.row(e);
                let base = attributions(model, x, &strat, &ops, &root.derive(3).derive(e as u64))?;
                let mut out = vec![vec![0.0; norms.len()]; ops.len()];
                let dirs = directions(x.len(), per_norm, &root.derive(2).derive(e as u64));
                for (k, &r) in norms.iter().enumerate() {
                    for (p, u) in dirs.iter().enumerate() {
                        let idx = (k * per_norm + p) as u64;
                        let xp: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + r * b).collect();
                        let phi = attributions(
                            model,
                            &xp,
                            &strat,
                            &ops,
                            &root.derive(4).derive(e as u64).derive(idx),
                        )?;
                        for s in 0..ops.len() {
                            out[s][k] += l2_distance(&base[s], &phi[s]);
                        }
                    }
                }
                Ok(out)
            })?;
            let count = (n_explain * per_norm) as f64;
            let mut m = vec![vec![0.0; norms.len()]; ops.len()];
            for out in &per_e {
                for s in 0..ops.len() {
                    for k in 0..norms.len() {
                        m[s][k] += out[s][k] / count;
                    }
                }
            }
            means.push(m);
        }
        for (s, kind) in cfg.summaries.iter().enumerate() {
            for (i, &wd) in cfg.decays.iter().enumerate() {
                for (k, &r) in norms.iter().enumerate() {
                    t.push_row(vec![
                        removal.as_str().into(),
                        kind.name().into(),
                        wd.into(),
                        r.into(),
                        means[i][s][k].into(),
                        models[i].frobenius_product().into(),
                    ])?;
                }
            }
            if cfg.decays.len() < 2 {
                continue;
            }
            let mut rhos = Vec::new();
            for (k, &r) in norms.iter().enumerate() {
                let diffs: Vec<f64> = means.iter().map(|m| m[s][k]).collect();
                let rho = spearman(&cfg.decays, &diffs).ok();
                t.push_summary(vec![
                    removal.as_str().into(),
                    kind.name().into(),
                    r.into(),
                    rho.into(),
                ])?;
                rhos.push((r, rho));
            }
            if removal == RemovalKind::Baseline && *kind == SummaryKind::Shapley {
                let ok = rhos.iter().all(|(_, v)| v.is_some_and(|v| v <= -0.5));
                let listing = rhos
                    .iter()
                    .map(|(r, v)| match v {
                        Some(v) => format!("{r}:{v:.3}"),
                        None => format!("{r}:undefined"),
                    })
                    .collect::<Vec<_>>()
                    .join(" ");
                t.check(
                    "attribution difference falls with decay [baseline/shapley]",
                    ok,
                    format!("norm:spearman {listing}"),
                );
            }
        }
    }
    if cfg.decays.len() >= 2 {
        let mut order: Vec<usize> = (0..cfg.decays.len()).collect();
        order.sort_by(|&a, &b| cfg.decays[a].total_cmp(&cfg.decays[b]));
        let prods: Vec<f64> = order.iter().map(|&i| models[i].frobenius_product()).collect();
        t.check(
            "Frobenius product strictly decreasing in decay",
            prods.windows(2).all(|w| w[1] < w[0]),
            format!(
                "{}",
                prods.iter().map(|p| format!("{p:.4}")).collect::<Vec<_>>().join(" > ")
            ),
        );
    }
    t.set_provenance(cfg.seed, &cfg.describe());
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> WeightDecayConfig {
        WeightDecayConfig {
            decays: vec![0.0, 0.05],
            grid: PerturbationGrid::new(vec![0.5], 3).unwrap(),
            explicands: 3,
            epochs: 10,
            ..WeightDecayConfig::default()
        }
    }

    #[test]
    fn single_decay_has_no_trend_rows() {
        let t = exp_weight_decay(&WeightDecayConfig { decays: vec![0.01], ..small() }).unwrap();
        assert_eq!(t.rows().len(), 1);
        assert!(t.summary().is_empty());
        assert!(t.checks().is_empty());
    }

    #[test]
    fn two_decays_give_trend_rows() {
        let t = exp_weight_decay(&small()).unwrap();
        assert_eq!(t.rows().len(), 2);
        assert_eq!(t.summary().len(), 1);
        assert_eq!(t.checks().len(), 2);
        let frob = t.column_values("frobenius_product").unwrap();
        assert!(frob[1] < frob[0]);
    }

    #[test]
    fn conditional_needs_gaussian_data() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "a,b,y\n0,1,0\n1,0,1\n1,1,1\n0,0,0\n").unwrap();
        let cfg = WeightDecayConfig {
            data: DataSource::Csv { path, label: "y".into() },
            removals: vec![RemovalKind::Conditional],
            ..small()
        };
        assert!(matches!(exp_weight_decay(&cfg), Err(Error::InvalidParameter(_))));
    }
}
