//! Small dense linear algebra: row-major matrices, cyclic Jacobi
//! eigendecomposition for symmetric matrices and Cholesky solves.
//!
//! Dimensions here never exceed a few dozen, so everything is plain loops.

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
                context: "matrix data length",
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: r.len(),
                    context: "ragged matrix rows",
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.rows,
                context: "matmul inner dimension",
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: v.len(),
                context: "matvec",
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// `self * self^T`, symmetric by construction.
    pub fn gram_rows(&self) -> SymMatrix {
        let n = self.rows;
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = dot(self.row(i), self.row(j));
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        SymMatrix { dim: n, data: g }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Symmetric matrix stored densely. Construction rejects asymmetric input.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl SymMatrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: data.len(),
                context: "symmetric matrix entries",
            });
        }
        let scale = data.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for i in 0..dim {
            for j in (i + 1)..dim {
                let gap = (data[i * dim + j] - data[j * dim + i]).abs();
                if gap > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric { row: i, col: j, gap });
                }
            }
        }
        // Average the two triangles so downstream code sees exact symmetry.
        let mut data = data;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let v = 0.5 * (data[i * dim + j] + data[j * dim + i]);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                actual: m.cols(),
                context: "square matrix",
            });
        }
        Self::new(m.rows(), m.into_vec())
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            data: Matrix::identity(dim).into_vec(),
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = d;
        }
        Self { dim: n, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| dot(&self.data[i * self.dim..(i + 1) * self.dim], v))
            .collect()
    }

    /// Principal sub-matrix on `idx` (rows and columns).
    pub fn submatrix(&self, idx: &[usize]) -> SymMatrix {
        let n = idx.len();
        let mut data = Vec::with_capacity(n * n);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        SymMatrix { dim: n, data }
    }

    /// Rectangular block with rows `ri` and columns `ci`.
    pub fn block(&self, ri: &[usize], ci: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(ri.len(), ci.len());
        for (a, &i) in ri.iter().enumerate() {
            for (b, &j) in ci.iter().enumerate() {
                m[(a, b)] = self.get(i, j);
            }
        }
        m
    }

    /// Symmetrize an arbitrary square matrix by averaging with its transpose.
    pub fn symmetrize(m: &Matrix) -> Result<SymMatrix> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                actual: m.cols(),
                context: "square matrix",
            });
        }
        let n = m.rows();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = 0.5 * (m[(i, j)] + m[(j, i)]);
            }
        }
        Ok(SymMatrix { dim: n, data })
    }
}

/// Eigenvalues in descending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        let mut out = Matrix::zeros(n, n);
        for k in 0..n {
            let lam = self.values[k];
            for i in 0..n {
                let vik = self.vectors[(i, k)] * lam;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)];
                }
            }
        }
        out
    }
}

pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition.
///
/// Stops once the off-diagonal Frobenius norm drops below `1e-12 * ||m||_F`.
/// Fails with [`Error::EigenNonConvergence`] after [`JACOBI_MAX_SWEEPS`].
pub fn sym_eigen(m: &SymMatrix) -> Result<SymEigen> {
    let n = m.dim();
    let mut a = m.data.clone();
    let mut v = Matrix::identity(n);
    let threshold = 1e-12 * m.frobenius_norm();

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNonConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max(m: &SymMatrix) -> Result<f64> {
    Ok(sym_eigen(m)?.values[0])
}

/// Cholesky factor `L` (lower triangular, row-major) of an SPD matrix.
///
/// A pivot below `1e-12 * max diagonal` is reported as [`Error::Singular`].
pub fn cholesky(m: &SymMatrix) -> Result<Matrix> {
    let n = m.dim();
    let max_diag = (0..n).map(|i| m.get(i, i)).fold(0.0f64, f64::max);
    let tol = 1e-12 * max_diag;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m.get(j, j);
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > tol) {
            return Err(Error::Singular { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

fn cholesky_solve_factored(l: &Matrix, rhs: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = rhs[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solve `m x = rhs` for symmetric positive definite `m`.
pub fn solve_spd(m: &SymMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            actual: rhs.len(),
            context: "solve_spd right-hand side",
        });
    }
    let l = cholesky(m)?;
    Ok(cholesky_solve_factored(&l, rhs))
}

/// Solve `m X = B` column by column, sharing one factorization.
pub fn solve_spd_many(m: &SymMatrix, rhs: &Matrix) -> Result<Matrix> {
    if rhs.rows() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            actual: rhs.rows(),
            context: "solve_spd right-hand side",
        });
    }
    let l = cholesky(m)?;
    let mut out = Matrix::zeros(rhs.rows(), rhs.cols());
    for j in 0..rhs.cols() {
        let x = cholesky_solve_factored(&l, &rhs.column(j));
        for (i, xi) in x.into_iter().enumerate() {
            out[(i, j)] = xi;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use proptest::prelude::*;

    fn random_sym(n: usize, rng: &mut Rng) -> SymMatrix {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rng.normal();
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymMatrix::new(n, data).unwrap()
    }

    fn max_orthonormal_error(v: &Matrix) -> f64 {
        let vtv = v.transpose().matmul(v).unwrap();
        let n = v.cols();
        let mut err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((vtv[(i, j)] - target).abs());
            }
        }
        err
    }

    #[test]
    fn eigen_identity() {
        let e = sym_eigen(&SymMatrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn eigen_two_by_two() {
        let m = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = sym_eigen(&m).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-12);
        assert!((e.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_diagonal_axis_vectors() {
        let m = SymMatrix::diagonal(&[4.0, 9.0, 1.0]);
        let e = sym_eigen(&m).unwrap();
        assert_eq!(e.values, vec![9.0, 4.0, 1.0]);
        let expected_axis = [1, 0, 2];
        for (k, &axis) in expected_axis.iter().enumerate() {
            for i in 0..3 {
                let target = if i == axis { 1.0 } else { 0.0 };
                assert!((e.vectors[(i, k)].abs() - target).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let err = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { row: 0, col: 1, .. }));
    }

    #[test]
    fn zero_matrix_eigen() {
        let e = sym_eigen(&SymMatrix::diagonal(&[0.0, 0.0])).unwrap();
        assert_eq!(e.values, vec![0.0, 0.0]);
    }

    #[test]
    fn solve_examples() {
        let x = solve_spd(&SymMatrix::identity(2), &[3.0, -1.0]).unwrap();
        assert_eq!(x, vec![3.0, -1.0]);
        let x = solve_spd(&SymMatrix::diagonal(&[4.0, 2.0]), &[8.0, 2.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        let m = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let x = solve_spd(&m, &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn solve_singular_reports_pivot() {
        let m = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        match solve_spd(&m, &[1.0, 1.0]) {
            Err(Error::Singular { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
        let indefinite = SymMatrix::diagonal(&[1.0, -1.0]);
        assert!(matches!(
            solve_spd(&indefinite, &[1.0, 1.0]),
            Err(Error::Singular { pivot: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn eigen_round_trip(n in 1usize..=12, seed in any::<u64>()) {
            let mut rng = Rng::new(seed, 0);
            let m = random_sym(n, &mut rng);
            let e = sym_eigen(&m).unwrap();
            let recon = e.reconstruct();
            let mut diff = 0.0;
            for i in 0..n {
                for j in 0..n {
                    diff += (recon[(i, j)] - m.get(i, j)).powi(2);
                }
            }
            prop_assert!(diff.sqrt() <= 1e-9 * m.frobenius_norm());
            prop_assert!(max_orthonormal_error(&e.vectors) <= 1e-9);
            prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn solve_inverts_multiply(n in 1usize..=10, seed in any::<u64>()) {
            let mut rng = Rng::new(seed, 1);
            let a = Matrix::from_vec(n, n, rng.normal_vec(n * n)).unwrap();
            let mut spd = a.gram_rows();
            // shift to keep it well away from singular
            let mut data = spd.as_slice().to_vec();
            for i in 0..n { data[i * n + i] += 0.5; }
            spd = SymMatrix::new(n, data).unwrap();
            let x: Vec<f64> = rng.normal_vec(n);
            let b = spd.matvec(&x);
            let solved = solve_spd(&spd, &b).unwrap();
            for (s, t) in solved.iter().zip(&x) {
                prop_assert!((s - t).abs() <= 1e-8 * (1.0 + t.abs()));
            }
            let resid: Vec<f64> = spd.matvec(&solved).iter().zip(&b).map(|(p, q)| p - q).collect();
            prop_assert!(norm2(&resid) <= 1e-9 * (spd.frobenius_norm() * norm2(&solved) + norm2(&b)));
        }
    }
}
