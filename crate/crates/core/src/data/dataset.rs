use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Rows of features with optional labels and column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Matrix,
    labels: Option<Vec<f64>>,
    columns: Vec<String>,
}

impl Dataset {
    pub fn new(rows: Matrix, labels: Option<Vec<f64>>, columns: Vec<String>) -> Result<Self> {
        if columns.len() != rows.cols() {
            return Err(Error::DimensionMismatch {
                expected: rows.cols(),
                actual: columns.len(),
                context: "column names",
            });
        }
        if let Some(l) = &labels {
            if l.len() != rows.rows() {
                return Err(Error::DimensionMismatch {
                    expected: rows.rows(),
                    actual: l.len(),
                    context: "labels",
                });
            }
        }
        if rows.as_slice().iter().any(|v| !v.is_finite())
            || labels.iter().flatten().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameter("dataset entries must be finite".into()));
        }
        Ok(Self {
            rows,
            labels,
            columns,
        })
    }

    /// Dataset with generated column names `x1, x2, ...`.
    pub fn unnamed(rows: Matrix, labels: Option<Vec<f64>>) -> Result<Self> {
        let columns = (1..=rows.cols()).map(|i| format!("x{i}")).collect();
        Self::new(rows, labels, columns)
    }

    pub fn n(&self) -> usize {
        self.rows.rows()
    }

    pub fn d(&self) -> usize {
        self.rows.cols()
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.rows.row(i)
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n().max(1) as f64;
        (0..self.d())
            .map(|j| self.rows.column(j).iter().sum::<f64>() / n)
            .collect()
    }

    /// First `n` rows (all of them if `n` exceeds the size).
    pub fn head(&self, n: usize) -> Dataset {
        let n = n.min(self.n());
        let d = self.d();
        let rows = Matrix::from_vec(n, d, self.rows.as_slice()[..n * d].to_vec())
            .expect("prefix of a valid matrix");
        Dataset {
            rows,
            labels: self.labels.as_ref().map(|l| l[..n].to_vec()),
            columns: self.columns.clone(),
        }
    }
}

/// Read a comma-separated file with a header row.
///
/// `label_column` names a column to split off as labels. Reported row
/// numbers count file lines from 1 (the header is line 1); columns count
/// from 1.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, label_column)
}

pub fn read_csv<R: Read>(input: R, label_column: Option<&str>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers: Vec<String> = match reader.headers() {
        Ok(h) => h.iter().map(str::to_string).collect(),
        Err(_) => return Err(Error::NoData),
    };
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(Error::NoData);
    }
    let label_idx = match label_column {
        None => None,
        Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::InvalidParameter(format!("label column {name:?} not found in header"))
        })?),
    };
    let width = headers.len();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0;
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse {
            row,
            col: 0,
            message: e.to_string(),
        })?;
        if record.len() != width {
            return Err(Error::Parse {
                row,
                col: record.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                col: j + 1,
                message: format!("not a number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    col: j + 1,
                    message: format!("not finite: {cell:?}"),
                });
            }
            if Some(j) == label_idx {
                labels.push(v);
            } else {
                values.push(v);
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::NoData);
    }
    let columns: Vec<String> = headers
        .into_iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != label_idx)
        .map(|(_, h)| h)
        .collect();
    let rows = Matrix::from_vec(n, columns.len(), values)?;
    Dataset::new(rows, label_idx.map(|_| labels), columns)
}
