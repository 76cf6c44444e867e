//! Desk-scale reproductions of the synthetic studies.
//!
//! Every experiment is a pure function of its configuration: all randomness
//! flows from `seed` through derived [`Rng`] streams indexed by explicand,
//! norm and perturbation, so output is identical for any worker count. Each
//! returns a [`ResultTable`] holding the per-point rows, a small summary
//! table, and the pass/fail checks the run asserts.

mod decay;
mod input;
mod model;
mod sanity;

pub use decay::{exp_weight_decay, DataSource, WeightDecayConfig};
pub use input::{exp_input_perturbation, exp_sampling, InputPerturbConfig, SamplingConfig};
pub use model::{exp_model_perturbation, ModelPerturbConfig};
pub use sanity::{exp_sanity_check, SanityConfig, SanityMethod};

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::models::Model;
use crate::numerics::{norm2, with_workers, Rng};
use crate::removal::{evaluate_all_subsets, RemovalStrategy};
use crate::summary::{attribute, SummaryOperator};

/// Marker written for values that are undefined, such as the correlation of
/// a constant attribution vector.
pub const MISSING: &str = "NA";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Text(String),
    Missing,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Real(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Real(v) => write!(f, "{v}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Missing => f.write_str(MISSING),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// One asserted inequality and whether it held.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

/// A rectangular table plus summary rows, checks and provenance.
///
/// The CSV form starts with `#`-prefixed provenance lines, then the header
/// and data rows; summary rows and checks follow as `#`-prefixed trailer
/// lines so the file still loads as a single plain table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    name: String,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
    summary_columns: Vec<String>,
    summary: Vec<Vec<Cell>>,
    checks: Vec<Check>,
    provenance: Vec<(String, String)>,
}

fn push_checked(width: usize, rows: &mut Vec<Vec<Cell>>, row: Vec<Cell>) -> Result<()> {
    if row.len() != width {
        return Err(Error::DimensionMismatch {
            expected: width,
            actual: row.len(),
            context: "table row",
        });
    }
    rows.push(row);
    Ok(())
}

impl ResultTable {
    pub fn new(name: &str, columns: &[&str], summary_columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary_columns: summary_columns.iter().map(|c| c.to_string()).collect(),
            summary: Vec::new(),
            checks: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn summary_columns(&self) -> &[String] {
        &self.summary_columns
    }

    pub fn summary(&self) -> &[Vec<Cell>] {
        &self.summary
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn provenance(&self) -> &[(String, String)] {
        &self.provenance
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<()> {
        push_checked(self.columns.len(), &mut self.rows, row)
    }

    pub fn push_summary(&mut self, row: Vec<Cell>) -> Result<()> {
        push_checked(self.summary_columns.len(), &mut self.summary, row)
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    /// All checks passed (vacuously true when there are none).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Record seed, crate version and a SHA-256 of the configuration lines.
    pub fn set_provenance(&mut self, seed: u64, config: &[(String, String)]) {
        let mut hasher = Sha256::new();
        for (k, v) in config {
            hasher.update(format!("{k}={v}\n").as_bytes());
        }
        let digest: String = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        self.provenance = vec![
            ("experiment".into(), self.name.clone()),
            ("version".into(), env!("CARGO_PKG_VERSION").into()),
            ("seed".into(), seed.to_string()),
            ("config-sha256".into(), digest),
        ];
        self.provenance
            .extend(config.iter().map(|(k, v)| (format!("config {k}"), v.clone())));
    }

    /// Index of a data column by name.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a data column (missing cells are skipped).
    pub fn column_values(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        Some(self.rows.iter().filter_map(|r| r[j].as_f64()).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: csv::Error| Error::Io(e.to_string());
        for (k, v) in &self.provenance {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut body = csv::Writer::from_writer(Vec::new());
        body.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            body.write_record(row.iter().map(|c| c.to_string())).map_err(io)?;
        }
        out.write_all(&body.into_inner().map_err(|e| Error::Io(e.to_string()))?)?;
        if !self.summary.is_empty() {
            writeln!(out, "# summary: {}", self.summary_columns.join(","))?;
            for row in &self.summary {
                let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
                writeln!(out, "# summary: {}", cells.join(","))?;
            }
        }
        for c in &self.checks {
            writeln!(out, "# check: {c}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    /// Write `<dir>/<name>.csv`, creating `dir` if needed.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        fs::create_dir_all(dir.as_ref())?;
        let path = dir.as_ref().join(format!("{}.csv", self.name));
        let mut file = fs::File::create(&path)?;
        self.write_csv(&mut file)?;
        Ok(path)
    }
}

/// Perturbation norms and the number of random directions per norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationGrid {
    norms: Vec<f64>,
    perturbations: usize,
}

impl PerturbationGrid {
    pub fn new(norms: Vec<f64>, perturbations: usize) -> Result<Self> {
        if norms.is_empty() || perturbations == 0 {
            return Err(Error::InvalidParameter(
                "perturbation grid needs at least one norm and one perturbation".into(),
            ));
        }
        if norms.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidParameter(
                "perturbation norms must be positive and finite".into(),
            ));
        }
        if norms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "perturbation norms must be strictly ascending".into(),
            ));
        }
        Ok(Self {
            norms,
            perturbations,
        })
    }

    /// `count` norms `max / count, 2 max / count, ..., max`.
    pub fn evenly_spaced(count: usize, max: f64, perturbations: usize) -> Result<Self> {
        let norms = (1..=count).map(|k| max * k as f64 / count as f64).collect();
        Self::new(norms, perturbations)
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn perturbations(&self) -> usize {
        self.perturbations
    }
}

impl Default for PerturbationGrid {
    /// 50 norms evenly spaced in (0, 2], 50 directions each.
    fn default() -> Self {
        Self::evenly_spaced(50, 2.0, 50).expect("valid default grid")
    }
}

pub(crate) fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// A standard-normal draw rescaled to unit length.
pub(crate) fn unit_direction(d: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let z = rng.normal_vec(d);
        let len = norm2(&z);
        if len > 0.0 {
            return z.iter().map(|v| v / len).collect();
        }
    }
}

/// `count` unit directions, the `p`-th drawn from stream `p` of `rng`.
///
/// Each direction is reused at every grid norm, so the perturbation
/// `x + r u` moves along one ray as `r` grows.
pub(crate) fn directions(d: usize, count: usize, rng: &Rng) -> Vec<Vec<f64>> {
    (0..count).map(|p| unit_direction(d, &mut rng.derive(p as u64))).collect()
}


pub(crate) fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Attributions of `x` under every operator, sharing one prediction vector.
pub(crate) fn attributions<M: Model + ?Sized>(
    f: &M,
    x: &[f64],
    strat: &RemovalStrategy,
    ops: &[SummaryOperator],
    rng: &Rng,
) -> Result<Vec<Vec<f64>>> {
    let v = evaluate_all_subsets(f, x, strat, rng, 1)?;
    ops.iter().map(|op| attribute(op, &v)).collect()
}

/// Map `0..n` in parallel, keeping index order.
pub(crate) fn par_map<T: Send>(
    n: usize,
    workers: usize,
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    with_workers(workers, || (0..n).into_par_iter().map(&f).collect())
}
