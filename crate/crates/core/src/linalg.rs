//! Dense and CSR matrices plus the handful of vector kernels the solvers need.
//!
//! Everything downstream is written against matrix-vector products, so the
//! two storage formats are interchangeable. Reductions run in index order,
//! which keeps every run bit-reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Matrices whose fraction of nonzeros falls below this are stored as CSR.
pub const SPARSE_DENSITY_THRESHOLD: f64 = 0.25;

/// Factor applied to power-iteration estimates so they stay upper bounds.
pub const NORM_INFLATION: f64 = 1.01;

const POWER_MAX_ITERS: usize = 200;
const POWER_REL_TOL: f64 = 1e-10;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Dense(DenseMatrix),
    Csr(CsrMatrix),
}

impl DenseMatrix {
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
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::InvalidProblem(format!(
                    "ragged matrix: row {i} has {} entries, expected {c}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl CsrMatrix {
    pub fn from_dense(d: &DenseMatrix) -> Self {
        let mut indptr = Vec::with_capacity(d.rows + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for i in 0..d.rows {
            for (j, &v) in d.row(i).iter().enumerate() {
                if v != 0.0 {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            rows: d.rows,
            cols: d.cols,
            indptr,
            indices,
            data,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.indptr.len() != self.rows + 1
            || self.indptr.first() != Some(&0)
            || *self.indptr.last().unwrap_or(&0) != self.data.len()
            || self.indices.len() != self.data.len()
            || self.indptr.windows(2).any(|w| w[0] > w[1])
            || self.indices.iter().any(|&j| j >= self.cols)
        {
            return Err(Error::InvalidProblem(format!(
                "malformed CSR matrix ({}x{}, {} stored entries)",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(())
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                d.data[i * self.cols + self.indices[k]] += self.data[k];
            }
        }
        d
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::Csr(CsrMatrix::from_dense(&DenseMatrix::zeros(rows, cols)))
    }

    /// Picks the storage format by density.
    pub fn from_dense_auto(d: DenseMatrix) -> Self {
        let total = d.rows * d.cols;
        if total == 0 {
            return Matrix::Dense(d);
        }
        let nnz = d.data.iter().filter(|v| **v != 0.0).count();
        if (nnz as f64) < SPARSE_DENSITY_THRESHOLD * total as f64 {
            Matrix::Csr(CsrMatrix::from_dense(&d))
        } else {
            Matrix::Dense(d)
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            Matrix::Dense(d) => d.rows,
            Matrix::Csr(c) => c.rows,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Matrix::Dense(d) => d.cols,
            Matrix::Csr(c) => c.cols,
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Matrix::Csr(_))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Matrix::Dense(d) => d.clone(),
            Matrix::Csr(c) => c.to_dense(),
        }
    }

    /// `out = self * x`
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols());
        debug_assert_eq!(out.len(), self.rows());
        match self {
            Matrix::Dense(d) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = dot(d.row(i), x);
                }
            }
            Matrix::Csr(c) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for k in c.indptr[i]..c.indptr[i + 1] {
                        s += c.data[k] * x[c.indices[k]];
                    }
                    *o = s;
                }
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        self.matvec_into(x, &mut out);
        out
    }

    /// `out += alpha * self^T * y`
    pub fn matvec_t_acc(&self, alpha: f64, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows());
        debug_assert_eq!(out.len(), self.cols());
        match self {
            Matrix::Dense(d) => {
                for (i, &yi) in y.iter().enumerate() {
                    if yi != 0.0 {
                        axpy(alpha * yi, d.row(i), out);
                    }
                }
            }
            Matrix::Csr(c) => {
                for (i, &yi) in y.iter().enumerate() {
                    for k in c.indptr[i]..c.indptr[i + 1] {
                        out[c.indices[k]] += alpha * yi * c.data[k];
                    }
                }
            }
        }
    }

    pub fn matvec_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        self.matvec_t_acc(1.0, y, &mut out);
        out
    }

    /// Upper estimate of the spectral norm by power iteration on `M^T M`.
    pub fn spectral_norm(&self) -> f64 {
        if self.rows() == 0 || self.cols() == 0 {
            return 0.0;
        }
        let mut tmp = vec![0.0; self.rows()];
        let lam = power_iteration(self.cols(), |v, out| {
            self.matvec_into(v, &mut tmp);
            out.iter_mut().for_each(|o| *o = 0.0);
            self.matvec_t_acc(1.0, &tmp, out);
        });
        lam.sqrt() * NORM_INFLATION
    }

    /// Upper estimate of the spectral norm of a symmetric PSD matrix.
    pub fn spectral_norm_psd(&self) -> f64 {
        if self.rows() == 0 {
            return 0.0;
        }
        power_iteration(self.cols(), |v, out| self.matvec_into(v, out)) * NORM_INFLATION
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        let d = self.to_dense();
        nalgebra::DMatrix::from_row_slice(d.rows, d.cols, &d.data)
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Matrix::Dense(d) => norm_inf(&d.data),
            Matrix::Csr(c) => norm_inf(&c.data),
        }
    }
}

/// Dominant eigenvalue of a symmetric PSD operator, uninflated.
///
/// The start vector is a fixed pseudo-random draw so results do not depend on
/// call order.
pub fn power_iteration(n: usize, mut apply: impl FnMut(&[f64], &mut [f64])) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let h = crate::rng::splitmix64(0x5EED_u64.wrapping_add(i as u64));
            0.5 + (h >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut w = vec![0.0; n];
    let mut est = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        apply(&v, &mut w);
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let prev = est;
        est = nw;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        if (est - prev).abs() <= POWER_REL_TOL * est {
            break;
        }
    }
    est
}

/// Smallest eigenvalue of a symmetric matrix (exact, via nalgebra).
pub fn min_eigenvalue(m: &Matrix) -> f64 {
    if m.rows() == 0 {
        return 0.0;
    }
    let eig = nalgebra::SymmetricEigen::new(m.to_nalgebra());
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Numerical rank and smallest nonzero singular value (exact, via SVD).
pub fn rank_and_sigma_min(m: &Matrix) -> (usize, f64) {
    if m.rows() == 0 || m.cols() == 0 {
        return (0, 0.0);
    }
    let svd = nalgebra::SVD::new(m.to_nalgebra(), false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = smax * 1e-12 * (m.rows().max(m.cols()) as f64);
    let nonzero: Vec<f64> = svd
        .singular_values
        .iter()
        .cloned()
        .filter(|s| *s > tol)
        .collect();
    let smin = nonzero.iter().cloned().fold(f64::INFINITY, f64::min);
    (nonzero.len(), if nonzero.is_empty() { 0.0 } else { smin })
}
