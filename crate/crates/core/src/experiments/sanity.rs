use std::fmt;
use std::str::FromStr;

use super::decay::{network_strategy, DataSource};
use super::{attributions, par_map, Cell, ResultTable};
use crate::error::{Error, Result};
use crate::models::{grad_attributions, randomize_cascading, train_mlp, GradMethod, MlpModel, OutputActivation, TrainConfig};
use crate::numerics::{pearson, spearman, Rng};
use crate::removal::{RemovalKind, RemovalStrategy};
use crate::summary::{build_operator, SummaryKind, SummaryOperator};

/// An attribution method compared under cascading randomization.
#[derive(Debug, Clone, PartialEq)]
pub enum SanityMethod {
    Removal { summary: SummaryKind, removal: RemovalKind },
    /// Plain input gradient.
    Gradient,
    GradTimesInput,
    /// 64-step integrated gradients from the data means.
    IntegratedGradients,
}

impl SanityMethod {
    pub fn is_removal(&self) -> bool {
        matches!(self, Self::Removal { .. })
    }

    fn exact(&self) -> bool {
        matches!(
            self,
            Self::Removal {
                removal: RemovalKind::Baseline | RemovalKind::Marginal,
                ..
            }
        )
    }
}

impl fmt::Display for SanityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Removal { summary, removal } => write!(f, "{}/{}", summary.name(), removal.as_str()),
            Self::Gradient => f.write_str("gradient"),
            Self::GradTimesInput => f.write_str("grad-x-input"),
            Self::IntegratedGradients => f.write_str("integrated-gradients"),
        }
    }
}

impl FromStr for SanityMethod {
    type Err = Error;

    /// `gradient`, `grad-x-input`, `integrated-gradients`, or
    /// `<summary>/<removal>` such as `shapley/baseline`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gradient" => Ok(Self::Gradient),
            "grad-x-input" => Ok(Self::GradTimesInput),
            "integrated-gradients" => Ok(Self::IntegratedGradients),
            other => match other.split_once('/') {
                Some((summary, removal)) => Ok(Self::Removal {
                    summary: summary.parse()?,
                    removal: removal.parse()?,
                }),
                None => Err(Error::InvalidParameter(format!(
                    "unknown method {other:?} (expected gradient, grad-x-input, \
                     integrated-gradients or <summary>/<removal>)"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SanityConfig {
    pub data: DataSource,
    pub hidden: Vec<usize>,
    pub seeds: usize,
    pub explicands: usize,
    pub methods: Vec<SanityMethod>,
    pub background: usize,
    pub conditional_samples: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for SanityConfig {
    fn default() -> Self {
        let removal = |summary, removal| SanityMethod::Removal { summary, removal };
        Self {
            data: DataSource::Synthetic { rho: 0.5, n: 500 },
            hidden: vec![16, 16],
            seeds: 10,
            explicands: 20,
            methods: vec![
                removal(SummaryKind::Shapley, RemovalKind::Baseline),
                removal(SummaryKind::Banzhaf, RemovalKind::Baseline),
                removal(SummaryKind::Shapley, RemovalKind::Marginal),
                SanityMethod::Gradient,
                SanityMethod::GradTimesInput,
            ],
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

impl SanityConfig {
    pub fn describe(&self) -> Vec<(String, String)> {
        let methods: Vec<String> = self.methods.iter().map(|m| m.to_string()).collect();
        vec![
            ("data".into(), self.data.describe()),
            ("hidden".into(), super::join(&self.hidden)),
            ("seeds".into(), self.seeds.to_string()),
            ("explicands".into(), self.explicands.to_string()),
            ("methods".into(), methods.join(",")),
            ("background".into(), self.background.to_string()),
            ("conditional_samples".into(), self.conditional_samples.to_string()),
            ("learning_rate".into(), self.learning_rate.to_string()),
            ("epochs".into(), self.epochs.to_string()),
            ("batch_size".into(), self.batch_size.to_string()),
        ]
    }
}

enum Prepared {
    Removal(RemovalStrategy, Vec<SummaryOperator>),
    Gradient(GradMethod),
}

/// Explicand-by-feature attributions flattened into one vector.
fn flat_attributions(model: &MlpModel, xs: &[&[f64]], how: &Prepared, rng: &Rng) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (e, x) in xs.iter().enumerate() {
        match how {
            Prepared::Removal(strat, ops) => {
                out.extend(attributions(model, x, strat, ops, &rng.derive(e as u64))?.remove(0));
            }
            Prepared::Gradient(g) => out.extend(grad_attributions(model, x, g)?),
        }
    }
    Ok(out)
}

fn defined(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedCorrelation) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Cascading-randomization sanity check.
///
/// For each seed a network is trained, then its layers are re-drawn from the
/// output side one at a time. At each depth the attributions of every
/// method are correlated with those of the trained network (Pearson and
/// Spearman over the flattened explicand-by-feature matrix). The depth-0 row
/// compares two independent attribution runs on the trained network.
/// Correlations of constant vectors are written as missing.
///
/// Summary rows: mean correlations per (method, depth) over seeds.
/// Checks, for removal-based methods: the mean Pearson correlation at full
/// randomization is within 0.2 of zero, and for exact removal rules every
/// depth-0 self-correlation is at least 0.99.
pub fn exp_sanity_check(cfg: &SanityConfig) -> Result<ResultTable> {
    if cfg.seeds == 0 || cfg.methods.is_empty() || cfg.explicands < 2 {
        return Err(Error::InvalidParameter(
            "need at least one seed, one method and two explicands".into(),
        ));
    }
    let root = Rng::new(cfg.seed, 0);
    // per seed: rows of (method index, depth, pearson, spearman)
    let per_seed = par_map(cfg.seeds, 1.max(cfg.workers), |i| {
        let sr = root.derive(i as u64);
        let (data, gauss) = cfg.data.load(&sr.derive(0))?;
        let labels = data.labels().ok_or(Error::NoData)?;
        let d = data.d();
        let mut widths = vec![d];
        widths.extend(&cfg.hidden);
        widths.push(1);
        let tc = TrainConfig::new(cfg.learning_rate, cfg.epochs, 0.0, cfg.batch_size, sr.derive(1).next_u64())?;
        let model = train_mlp(data.rows(), labels, &widths, OutputActivation::Sigmoid, &tc)?;
        let layers = model.layers.len();
        let n = cfg.explicands.min(data.n());
        let xs: Vec<&[f64]> = (0..n).map(|e| data.row(e)).collect();
        let mut rows = Vec::new();
        for (mi, method) in cfg.methods.iter().enumerate() {
            let how = match method {
                SanityMethod::Removal { summary, removal } => Prepared::Removal(
                    network_strategy(*removal, &data, gauss.as_ref(), cfg.background, cfg.conditional_samples)?,
                    vec![build_operator(summary, d)?],
                ),
                SanityMethod::Gradient => Prepared::Gradient(GradMethod::Vanilla),
                SanityMethod::GradTimesInput => Prepared::Gradient(GradMethod::GradTimesInput),
                SanityMethod::IntegratedGradients => Prepared::Gradient(GradMethod::IntegratedGradients {
                    steps: 64,
                    baseline: data.column_means(),
                }),
            };
            let stream = sr.derive(10 + mi as u64);
            let reference = flat_attributions(&model, &xs, &how, &stream.derive(0))?;
            for depth in 0..=layers {
                let other = if depth == 0 {
                    flat_attributions(&model, &xs, &how, &stream.derive(1))?
                } else {
                    let randomized = randomize_cascading(&model, depth, &sr.derive(2))?;
                    flat_attributions(&randomized, &xs, &how, &stream.derive(2 + depth as u64))?
                };
                rows.push((
                    mi,
                    depth,
                    defined(pearson(&reference, &other))?,
                    defined(spearman(&reference, &other))?,
                ));
            }
        }
        Ok((rows, layers))
    })?;

    let mut t = ResultTable::new(
        "sanity-check",
        &["seed", "method", "depth", "pearson", "spearman"],
        &["method", "depth", "mean_pearson", "mean_spearman", "defined"],
    );
    for (i, (rows, _)) in per_seed.iter().enumerate() {
        for &(mi, depth, p, s) in rows {
            t.push_row(vec![
                i.into(),
                cfg.methods[mi].to_string().into(),
                depth.into(),
                p.into(),
                s.into(),
            ])?;
        }
    }
    let layers = per_seed[0].1;
    let avg = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    for (mi, method) in cfg.methods.iter().enumerate() {
        for depth in 0..=layers {
            let cells: Vec<(Option<f64>, Option<f64>)> = per_seed
                .iter()
                .flat_map(|(rows, _)| rows.iter())
                .filter(|r| r.0 == mi && r.1 == depth)
                .map(|r| (r.2, r.3))
                .collect();
            let ps: Vec<f64> = cells.iter().filter_map(|c| c.0).collect();
            let ss: Vec<f64> = cells.iter().filter_map(|c| c.1).collect();
            let mean_p = avg(&ps);
            t.push_summary(vec![
                method.to_string().into(),
                depth.into(),
                mean_p.into(),
                avg(&ss).into(),
                ps.len().into(),
            ])?;
            if !method.is_removal() {
                continue;
            }
            if depth == layers {
                t.check(
                    format!("full randomization decorrelates [{method}]"),
                    mean_p.is_none_or(|m| m.abs() <= 0.2),
                    match mean_p {
                        Some(m) => format!("mean pearson {m:.4} over {} seeds", ps.len()),
                        None => "all correlations undefined".into(),
                    },
                );
            }
            if depth == 0 && method.exact() {
                let lo = cells
                    .iter()
                    .map(|c| c.0.unwrap_or(f64::NEG_INFINITY))
                    .fold(f64::INFINITY, f64::min);
                t.check(
                    format!("repeat runs agree [{method}]"),
                    lo >= 0.99,
                    format!("smallest depth-0 pearson {}", Cell::Real(lo)),
                );
            }
        }
    }
    t.set_provenance(cfg.seed, &cfg.describe());
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in SanityConfig::default().methods {
            assert_eq!(m.to_string().parse::<SanityMethod>().unwrap(), m);
        }
        assert!("shapley/sideways".parse::<SanityMethod>().is_err());
        assert!("saliency".parse::<SanityMethod>().is_err());
    }

    #[test]
    fn single_seed_table() {
        let cfg = SanityConfig {
            seeds: 1,
            explicands: 4,
            epochs: 5,
            ..SanityConfig::default()
        };
        let t = exp_sanity_check(&cfg).unwrap();
        // 5 methods x (3 layers + 1)
        assert_eq!(t.rows().len(), 20);
        assert_eq!(t.summary().len(), 20);
        let depth0: Vec<f64> = t
            .rows()
            .iter()
            .filter(|r| r[2] == Cell::Int(0))
            .filter_map(|r| r[3].as_f64())
            .collect();
        assert!(depth0.iter().all(|&p| p > 0.999999));
    }
}
