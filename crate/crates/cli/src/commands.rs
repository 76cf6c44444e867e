//! Key registries and runners for each command.

use std::path::PathBuf;
use std::sync::Arc;

use removal_attrib::bounds::RobustnessCertificate;
use removal_attrib::data::{load_csv, Dataset, GaussianModel};
use removal_attrib::experiments::{
    exp_input_perturbation, exp_model_perturbation, exp_sampling, exp_sanity_check, exp_weight_decay, DataSource,
    InputPerturbConfig, ModelPerturbConfig, PerturbationGrid, ResultTable, SamplingConfig, SanityConfig,
    SanityMethod, WeightDecayConfig,
};
use removal_attrib::models::Link;
use removal_attrib::numerics::Rng;
use removal_attrib::removal::{evaluate_all_subsets, RemovalKind, RemovalMode, RemovalStrategy};
use removal_attrib::summary::{attribute, build_operator, closed_form_norms, LimeConfig, SummaryKind};

use crate::config::{Config, ConfigError, Key, Result};
use crate::model_spec::parse_model;

pub const EXPERIMENTS: [&str; 5] = ["input-perturb", "model-perturb", "weight-decay", "sanity-check", "sampling"];

fn list<T: ToString>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn kinds(items: &[SummaryKind]) -> String {
    list(&items.iter().map(|k| k.name()).collect::<Vec<_>>())
}

fn removals(items: &[RemovalKind]) -> String {
    list(&items.iter().map(|k| k.as_str()).collect::<Vec<_>>())
}

fn link_name(link: Link) -> &'static str {
    match link {
        Link::Identity => "identity",
        Link::Sigmoid => "sigmoid",
    }
}

fn mode_keys(mode: RemovalMode, samples: usize) -> [Key; 2] {
    let (name, m) = match mode {
        RemovalMode::Exact => ("exact", samples),
        RemovalMode::Sampled(m) => ("sampled", m),
    };
    [
        Key::new("removal.mode", name, "exact or sampled averaging over removed features"),
        Key::new("removal.samples", m, "draws per subset when removal.mode = sampled"),
    ]
}

fn common_keys(seed: u64, workers: usize, out: &str) -> [Key; 3] {
    [
        Key::new("run.seed", seed, "random seed (also --seed)"),
        Key::new("run.workers", workers, "worker threads; never changes output (also --workers)"),
        Key::new("output.dir", out, "directory for CSV output, empty for none (also --output)"),
    ]
}

fn grid_keys(grid: &PerturbationGrid) -> [Key; 2] {
    [
        Key::new("grid.norms", list(grid.norms()), "ascending perturbation norms"),
        Key::new("grid.perturbations", grid.perturbations(), "random directions per explicand"),
    ]
}

fn mode(cfg: &Config) -> Result<RemovalMode> {
    match cfg.str("removal.mode") {
        "exact" => Ok(RemovalMode::Exact),
        "sampled" => Ok(RemovalMode::Sampled(cfg.get("removal.samples")?)),
        other => Err(ConfigError(format!("unknown removal.mode {other:?} (valid: exact, sampled)"))),
    }
}

fn link(cfg: &Config) -> Result<Link> {
    match cfg.str("model.link") {
        "identity" => Ok(Link::Identity),
        "sigmoid" => Ok(Link::Sigmoid),
        other => Err(ConfigError(format!("unknown model.link {other:?} (valid: identity, sigmoid)"))),
    }
}

fn grid(cfg: &Config) -> Result<PerturbationGrid> {
    Ok(PerturbationGrid::new(cfg.list("grid.norms")?, cfg.get("grid.perturbations")?)?)
}

fn data_source(cfg: &Config) -> Result<DataSource> {
    let path = cfg.str("data.path");
    if path.is_empty() {
        Ok(DataSource::Synthetic {
            rho: cfg.get("data.rho")?,
            n: cfg.get("data.n")?,
        })
    } else {
        Ok(DataSource::Csv {
            path: PathBuf::from(path),
            label: cfg.str("data.label").to_string(),
        })
    }
}

fn data_keys(data: &DataSource) -> Vec<Key> {
    let (rho, n) = match data {
        DataSource::Synthetic { rho, n } => (*rho, *n),
        DataSource::Csv { .. } => (0.5, 500),
    };
    vec![
        Key::new("data.path", "", "training CSV with a header row; empty for synthetic data"),
        Key::new("data.label", "label", "label column of data.path"),
        Key::new("data.rho", rho, "correlation of the first two synthetic features"),
        Key::new("data.n", n, "synthetic training rows"),
    ]
}

fn network_keys(hidden: &[usize], lr: f64, epochs: usize, batch: usize, background: usize, samples: usize) -> Vec<Key> {
    vec![
        Key::new("model.hidden", list(hidden), "hidden-layer widths"),
        Key::new("train.learning_rate", lr, "SGD step size"),
        Key::new("train.epochs", epochs, "training epochs"),
        Key::new("train.batch_size", batch, "minibatch size"),
        Key::new("removal.background", background, "rows averaged over by marginal removal"),
        Key::new("removal.samples", samples, "draws per subset for conditional removal"),
    ]
}

/// Keys accepted by `attribute`.
pub fn attribute_keys() -> Vec<Key> {
    let mut keys = vec![
        Key::new("model.spec", "", "glm:<json or file>, mlp:<json or file> or extern:<command>"),
        Key::new("input.x", "", "comma-separated explicand"),
        Key::new("removal.kind", "baseline", "baseline, marginal or conditional"),
        Key::new("removal.baseline", "0", "baseline value, one number or one per feature"),
    ];
    keys.extend(mode_keys(RemovalMode::Exact, 1000));
    keys.extend([
        Key::new("data.path", "", "CSV for marginal removal; empty for a Gaussian"),
        Key::new("data.label", "", "label column to drop from data.path"),
        Key::new("data.rho", 0, "Gaussian correlation of features 1 and 2 when data.path is empty"),
        Key::new("summary.kind", "shapley", "loo, shapley, banzhaf, rise or lime"),
        Key::new("lime.sigma2", "auto", "LIME kernel width; auto = 0.75 sqrt(d)"),
        Key::new("bound.lipschitz", "auto", "Lipschitz constant L; auto = from the model"),
        Key::new("bound.output", "auto", "output bound B; auto = from the model"),
        Key::new("bound.tv", "auto", "TV constant M; auto = from the Gaussian"),
    ]);
    keys.extend(common_keys(0, 1, ""));
    keys
}

/// Keys accepted by `norms`.
pub fn norms_keys() -> Vec<Key> {
    vec![
        Key::new("norms.d_min", 1, "smallest number of features"),
        Key::new("norms.d_max", 12, "largest number of features (at most 20)"),
        Key::new("norms.kinds", "shapley,banzhaf,loo,rise", "summary kinds with closed forms"),
        Key::new("lime.sigma2", "", "LIME kernel widths to tabulate, empty for none"),
        Key::new("output.dir", "", "directory for norms.csv, empty for none (also --output)"),
    ]
}

/// Keys accepted by `experiment <name>`.
pub fn experiment_keys(name: &str) -> Vec<Key> {
    let mut keys = Vec::new();
    match name {
        "input-perturb" => {
            let c = InputPerturbConfig::default();
            keys.extend([
                Key::new("data.rhos", list(&c.rhos), "feature correlations to run"),
                Key::new("data.n", c.train_size, "synthetic training rows"),
                Key::new("model.alphas", list(&c.alphas), "coefficient scale factors"),
                Key::new("model.link", link_name(c.link), "identity or sigmoid"),
                Key::new("removal.kinds", removals(&c.removals), "removal rules"),
            ]);
            keys.extend(mode_keys(c.mode, 1000));
            keys.extend([
                Key::new("summary.kinds", kinds(&c.summaries), "summary techniques"),
                Key::new("run.explicands", c.explicands, "explicands per run"),
            ]);
            keys.extend(grid_keys(&c.grid));
            keys.extend([
                Key::new("train.learning_rate", c.learning_rate, "gradient-descent step size"),
                Key::new("train.epochs", c.epochs, "training epochs"),
            ]);
            keys.extend(common_keys(c.seed, c.workers, "results"));
        }
        "sampling" => {
            let c = SamplingConfig::default();
            keys.extend([
                Key::new("data.rho", c.rho, "feature correlation"),
                Key::new("data.n", c.train_size, "synthetic training rows"),
                Key::new("model.link", link_name(c.link), "identity or sigmoid"),
                Key::new("removal.kinds", removals(&c.removals), "removal rules"),
                Key::new("removal.sample_sizes", list(&c.sample_sizes), "draws per subset to compare"),
                Key::new("summary.kinds", kinds(&c.summaries), "summary techniques"),
                Key::new("run.explicands", c.explicands, "explicands per run"),
            ]);
            keys.extend(grid_keys(&c.grid));
            keys.extend([
                Key::new("train.learning_rate", c.learning_rate, "gradient-descent step size"),
                Key::new("train.epochs", c.epochs, "training epochs"),
            ]);
            keys.extend(common_keys(c.seed, c.workers, "results"));
        }
        "model-perturb" => {
            let c = ModelPerturbConfig::default();
            keys.extend([
                Key::new("data.rhos", list(&c.rhos), "feature correlations to run"),
                Key::new("model.beta", list(&c.beta), "coefficients of the first logistic model"),
                Key::new("model.beta_perturbed", list(&c.beta_perturbed), "coefficients of the second"),
                Key::new("removal.kinds", removals(&c.removals), "removal rules"),
            ]);
            keys.extend(mode_keys(c.mode, 1000));
            keys.extend([
                Key::new("summary.kinds", kinds(&c.summaries), "summary techniques"),
                Key::new("run.explicands", c.explicands, "explicands per rho"),
                Key::new("probes.count", c.probes, "probes per functional-distance estimate"),
                Key::new("probes.scale", c.probe_scale, "standard deviation of everywhere probes"),
            ]);
            keys.extend(common_keys(c.seed, c.workers, "results"));
        }
        "weight-decay" => {
            let c = WeightDecayConfig::default();
            keys.extend(data_keys(&c.data));
            keys.push(Key::new("train.decays", list(&c.decays), "weight-decay values, one network each"));
            keys.extend(network_keys(
                &c.hidden,
                c.learning_rate,
                c.epochs,
                c.batch_size,
                c.background,
                c.conditional_samples,
            ));
            keys.extend([
                Key::new("removal.kinds", removals(&c.removals), "removal rules"),
                Key::new("summary.kinds", kinds(&c.summaries), "summary techniques"),
                Key::new("run.explicands", c.explicands, "explicands (first data rows)"),
            ]);
            keys.extend(grid_keys(&c.grid));
            keys.extend(common_keys(c.seed, c.workers, "results"));
        }
        "sanity-check" => {
            let c = SanityConfig::default();
            keys.extend(data_keys(&c.data));
            keys.extend(network_keys(
                &c.hidden,
                c.learning_rate,
                c.epochs,
                c.batch_size,
                c.background,
                c.conditional_samples,
            ));
            keys.extend([
                Key::new("sanity.methods", list(&c.methods), "summary/removal pairs, gradient, grad-x-input or integrated-gradients"),
                Key::new("run.seeds", c.seeds, "independent networks"),
                Key::new("run.explicands", c.explicands, "explicands per network"),
            ]);
            keys.extend(common_keys(c.seed, c.workers, "results"));
        }
        _ => {}
    }
    keys
}

/// Whether a run's assertions held.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

fn report(table: &ResultTable, out_dir: &str) -> Result<Outcome> {
    if !out_dir.is_empty() {
        let path = table.save(out_dir)?;
        println!("wrote {}", path.display());
    }
    if !table.summary().is_empty() {
        println!("{}", table.summary_columns().join(","));
        for row in table.summary() {
            println!("{}", list(row));
        }
    }
    for c in table.checks() {
        println!("{c}");
    }
    if table.passed() {
        Ok(Outcome::Pass)
    } else {
        for c in table.checks().iter().filter(|c| !c.passed) {
            eprintln!("assertion failed: {c}");
        }
        Ok(Outcome::Fail)
    }
}

pub fn run_experiment(name: &str, cfg: &Config) -> Result<Outcome> {
    let seed = cfg.get("run.seed")?;
    let workers = cfg.get("run.workers")?;
    let table = match name {
        "input-perturb" => exp_input_perturbation(&InputPerturbConfig {
            rhos: cfg.list("data.rhos")?,
            alphas: cfg.list("model.alphas")?,
            removals: cfg.list("removal.kinds")?,
            summaries: cfg.list("summary.kinds")?,
            mode: mode(cfg)?,
            link: link(cfg)?,
            train_size: cfg.get("data.n")?,
            explicands: cfg.get("run.explicands")?,
            grid: grid(cfg)?,
            learning_rate: cfg.get("train.learning_rate")?,
            epochs: cfg.get("train.epochs")?,
            seed,
            workers,
        })?,
        "sampling" => exp_sampling(&SamplingConfig {
            rho: cfg.get("data.rho")?,
            sample_sizes: cfg.list("removal.sample_sizes")?,
            removals: cfg.list("removal.kinds")?,
            summaries: cfg.list("summary.kinds")?,
            link: link(cfg)?,
            train_size: cfg.get("data.n")?,
            explicands: cfg.get("run.explicands")?,
            grid: grid(cfg)?,
            learning_rate: cfg.get("train.learning_rate")?,
            epochs: cfg.get("train.epochs")?,
            seed,
            workers,
        })?,
        "model-perturb" => exp_model_perturbation(&ModelPerturbConfig {
            rhos: cfg.list("data.rhos")?,
            removals: cfg.list("removal.kinds")?,
            summaries: cfg.list("summary.kinds")?,
            mode: mode(cfg)?,
            beta: cfg.list("model.beta")?,
            beta_perturbed: cfg.list("model.beta_perturbed")?,
            explicands: cfg.get("run.explicands")?,
            probes: cfg.get("probes.count")?,
            probe_scale: cfg.get("probes.scale")?,
            seed,
            workers,
        })?,
        "weight-decay" => exp_weight_decay(&WeightDecayConfig {
            data: data_source(cfg)?,
            decays: cfg.list("train.decays")?,
            hidden: cfg.list("model.hidden")?,
            removals: cfg.list("removal.kinds")?,
            summaries: cfg.list("summary.kinds")?,
            grid: grid(cfg)?,
            explicands: cfg.get("run.explicands")?,
            background: cfg.get("removal.background")?,
            conditional_samples: cfg.get("removal.samples")?,
            learning_rate: cfg.get("train.learning_rate")?,
            epochs: cfg.get("train.epochs")?,
            batch_size: cfg.get("train.batch_size")?,
            seed,
            workers,
        })?,
        "sanity-check" => exp_sanity_check(&SanityConfig {
            data: data_source(cfg)?,
            hidden: cfg.list("model.hidden")?,
            seeds: cfg.get("run.seeds")?,
            explicands: cfg.get("run.explicands")?,
            methods: cfg.list::<SanityMethod>("sanity.methods")?,
            background: cfg.get("removal.background")?,
            conditional_samples: cfg.get("removal.samples")?,
            learning_rate: cfg.get("train.learning_rate")?,
            epochs: cfg.get("train.epochs")?,
            batch_size: cfg.get("train.batch_size")?,
            seed,
            workers,
        })?,
        other => {
            return Err(ConfigError(format!(
                "unknown experiment {other:?} (valid: {})",
                EXPERIMENTS.join(", ")
            )))
        }
    };
    report(&table, cfg.str("output.dir"))
}

fn auto_or(cfg: &Config, key: &str, auto: Option<f64>) -> Result<Option<f64>> {
    match cfg.str(key) {
        "auto" => Ok(auto),
        _ => Ok(Some(cfg.get(key)?)),
    }
}

fn summary_kind(cfg: &Config, d: usize) -> Result<SummaryKind> {
    let kind: SummaryKind = cfg.get("summary.kind")?;
    Ok(match kind {
        SummaryKind::Lime(_) => SummaryKind::Lime(match cfg.str("lime.sigma2") {
            "auto" => LimeConfig::tabular_preset(d),
            _ => LimeConfig::new(cfg.get("lime.sigma2")?)?,
        }),
        k => k,
    })
}

pub fn run_attribute(cfg: &Config) -> Result<Outcome> {
    let x: Vec<f64> = cfg.list("input.x")?;
    if x.is_empty() {
        return Err(ConfigError("input.x is required (comma-separated explicand)".into()));
    }
    let d = x.len();
    let spec = cfg.str("model.spec");
    if spec.is_empty() {
        return Err(ConfigError("model.spec is required".into()));
    }
    let removal: RemovalKind = cfg.get("removal.kind")?;
    let kind = summary_kind(cfg, d)?;
    let op = build_operator(&kind, d)?;
    let model = parse_model(spec, d)?;

    let data: Option<Dataset> = match cfg.str("data.path") {
        "" => None,
        path => {
            let label = cfg.str("data.label");
            Some(load_csv(path, (!label.is_empty()).then_some(label))?)
        }
    };
    let gauss = || GaussianModel::correlated_pair(d, cfg.get("data.rho")?).map_err(ConfigError::from);
    let mut tv = None;
    let strat = match removal {
        RemovalKind::Baseline => {
            let b: Vec<f64> = cfg.list("removal.baseline")?;
            let b = match b.len() {
                1 => vec![b[0]; d],
                n if n == d => b,
                n => return Err(ConfigError(format!("removal.baseline has {n} values for {d} features"))),
            };
            RemovalStrategy::baseline(b)
        }
        RemovalKind::Marginal => match &data {
            Some(ds) => RemovalStrategy::marginal_dataset(Arc::new(ds.clone()), mode(cfg)?)?,
            None => RemovalStrategy::marginal_gaussian(gauss()?, mode(cfg)?)?,
        },
        RemovalKind::Conditional => {
            if data.is_some() {
                return Err(ConfigError(
                    "conditional removal needs the Gaussian data model; leave data.path empty".into(),
                ));
            }
            let g = gauss()?;
            tv = Some(g.tv_constant());
            RemovalStrategy::conditional(g, mode(cfg)?)?
        }
    };
    let rng = Rng::new(cfg.get("run.seed")?, 0);
    let v = evaluate_all_subsets(model.as_ref(), &x, &strat, &rng, cfg.get("run.workers")?)?;
    let phi = attribute(&op, &v)?;

    let names: Vec<String> = match &data {
        Some(ds) if ds.columns().len() == d => ds.columns().to_vec(),
        _ => (1..=d).map(|i| format!("x{i}")).collect(),
    };
    let mut table = ResultTable::new(
        "attribute",
        &["feature", "attribution"],
        &["removal", "summary", "lipschitz", "output_bound", "tv_constant", "g", "h", "slope", "numeric_h"],
    );
    println!("feature,attribution");
    for (name, value) in names.iter().zip(&phi) {
        println!("{name},{value}");
        table.push_row(vec![name.as_str().into(), (*value).into()])?;
    }
    let l = auto_or(cfg, "bound.lipschitz", model.lipschitz_constant())?;
    let b = auto_or(cfg, "bound.output", model.output_bound())?.unwrap_or(f64::INFINITY);
    let m = auto_or(cfg, "bound.tv", tv)?.unwrap_or(0.0);
    match l {
        Some(l) => {
            let cert = RobustnessCertificate::for_operator(removal, &op, l, b, m)?;
            println!(
                "certificate: removal={} summary={} L={l} B={b} M={m} g={} h={}{} slope={}",
                removal.as_str(),
                kind.name(),
                cert.g,
                cert.h,
                if cert.numeric_h { " (numeric-h)" } else { "" },
                cert.slope()
            );
            table.push_summary(vec![
                removal.as_str().into(),
                kind.name().into(),
                l.into(),
                b.into(),
                m.into(),
                cert.g.into(),
                cert.h.into(),
                cert.slope().into(),
                cert.numeric_h.to_string().into(),
            ])?;
        }
        None => println!("certificate: unavailable (no Lipschitz constant known; set bound.lipschitz)"),
    }
    let out = cfg.str("output.dir");
    if !out.is_empty() {
        table.set_provenance(cfg.get("run.seed")?, &cfg.pairs());
        let path = table.save(out)?;
        println!("wrote {}", path.display());
    }
    Ok(Outcome::Pass)
}

pub fn run_norms(cfg: &Config) -> Result<Outcome> {
    let lo: usize = cfg.get("norms.d_min")?;
    let hi: usize = cfg.get("norms.d_max")?;
    if lo == 0 || lo > hi {
        return Err(ConfigError(format!("need 1 <= norms.d_min <= norms.d_max, got {lo}..{hi}")));
    }
    let kinds: Vec<SummaryKind> = cfg.list("norms.kinds")?;
    let sigmas: Vec<f64> = cfg.list("lime.sigma2")?;
    let mut t = ResultTable::new(
        "norms",
        &[
            "kind",
            "d",
            "sigma2",
            "spectral",
            "spectral_closed_form",
            "one_inf",
            "one_inf_closed_form",
            "frobenius_to_banzhaf",
            "frobenius_to_loo",
        ],
        &[],
    );
    let (mut worst_spec, mut worst_one) = (0.0f64, 0.0f64);
    let mut lime_monotone = true;
    for d in lo..=hi {
        for kind in &kinds {
            let n = build_operator(kind, d)?.norms()?;
            let c = closed_form_norms(kind, d)?;
            worst_spec = worst_spec.max((n.spectral - c.spectral).abs());
            worst_one = worst_one.max((n.one_inf - c.one_inf).abs());
            t.push_row(vec![
                kind.name().into(),
                d.into(),
                None::<f64>.into(),
                n.spectral.into(),
                c.spectral.into(),
                n.one_inf.into(),
                c.one_inf.into(),
                None::<f64>.into(),
                None::<f64>.into(),
            ])?;
        }
        if sigmas.is_empty() {
            continue;
        }
        let banzhaf = build_operator(&SummaryKind::Banzhaf, d)?;
        let loo = build_operator(&SummaryKind::LeaveOneOut, d)?;
        let mut by_sigma = Vec::new();
        for &s2 in &sigmas {
            let op = build_operator(&SummaryKind::Lime(LimeConfig::new(s2)?), d)?;
            let n = op.norms()?;
            let to_banzhaf = op.frobenius_distance(&banzhaf)?;
            by_sigma.push((s2, to_banzhaf));
            t.push_row(vec![
                "lime".into(),
                d.into(),
                s2.into(),
                n.spectral.into(),
                None::<f64>.into(),
                n.one_inf.into(),
                None::<f64>.into(),
                to_banzhaf.into(),
                op.frobenius_distance(&loo)?.into(),
            ])?;
        }
        by_sigma.sort_by(|a, b| a.0.total_cmp(&b.0));
        lime_monotone &= by_sigma.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
    }
    if !kinds.is_empty() {
        t.check(
            "numeric norms match closed forms",
            worst_spec <= 1e-8 && worst_one <= 1e-9,
            format!("max spectral error {worst_spec:.2e}, max one_inf error {worst_one:.2e}"),
        );
    }
    if sigmas.len() >= 2 {
        t.check(
            "lime distance to banzhaf nonincreasing in sigma2",
            lime_monotone,
            format!("{} widths per d", sigmas.len()),
        );
    }
    t.set_provenance(0, &cfg.pairs());
    print!("{}", t.to_csv_string()?.lines().filter(|l| !l.starts_with("# ")).map(|l| format!("{l}\n")).collect::<String>());
    for c in t.checks() {
        println!("{c}");
    }
    let out = cfg.str("output.dir");
    if !out.is_empty() {
        let path = t.save(out)?;
        println!("wrote {}", path.display());
    }
    Ok(if t.passed() { Outcome::Pass } else { Outcome::Fail })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_registries_are_complete() {
        for name in EXPERIMENTS {
            let keys = experiment_keys(name);
            assert!(!keys.is_empty(), "{name}");
            let mut names: Vec<&str> = keys.iter().map(|k| k.name).collect();
            names.sort_unstable();
            let before = names.len();
            names.dedup();
            assert_eq!(before, names.len(), "duplicate key in {name}");
            for k in ["run.seed", "run.workers", "output.dir"] {
                assert!(names.contains(&k), "{name} lacks {k}");
            }
        }
        assert!(experiment_keys("nope").is_empty());
    }

    #[test]
    fn defaults_round_trip_through_the_registry() {
        let keys = experiment_keys("sampling");
        let cfg = Config::new(&keys);
        assert_eq!(cfg.list::<usize>("removal.sample_sizes").unwrap(), SamplingConfig::default().sample_sizes);
        assert_eq!(grid(&cfg).unwrap(), SamplingConfig::default().grid);
        assert_eq!(link(&cfg).unwrap(), Link::Identity);
        let keys = experiment_keys("sanity-check");
        let cfg = Config::new(&keys);
        assert_eq!(cfg.list::<SanityMethod>("sanity.methods").unwrap(), SanityConfig::default().methods);
        assert_eq!(data_source(&cfg).unwrap(), SanityConfig::default().data);
    }
}
