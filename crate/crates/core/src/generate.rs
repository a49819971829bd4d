//! Seeded instance generators and analytic test problems.
//!
//! All randomness comes from [`CounterRng`](crate::rng::CounterRng), so a
//! `(parameters, seed)` pair identifies an instance exactly.

use std::io::Read;

use crate::error::{Error, Result};
use crate::geometry::{Cone, DualDomain, SimpleSet};
use crate::linalg::{dot, DenseMatrix, Matrix};
use crate::problem::{Iterate, ProblemData, ProblemInstance, QuadForm};
use crate::rng::CounterRng;

/// Half-width of the box `[-10, 10]^n` used by the random family.
pub const RANDOM_QCQP_BOX: f64 = 10.0;
/// Eigenvalues of the random Hessians are drawn from `U[0, 100]`.
pub const RANDOM_QCQP_EIG_MAX: f64 = 100.0;

/// Random convex QCQP with `Q_i = L_i' S_i L_i`, `L_i` orthogonal and `S_i`
/// diagonal with entries in `U[0, 100]` whose smallest entry is set to zero,
/// `q_i ~ N(0, I)`, `r_0 = 0`, `-r_i ~ U[0, 1]`, `X = [-10, 10]^n`, `K = R^m_+`
/// and no equality constraints.
///
/// Draw order, for `i = 0..=m`: the `n x n` Gaussian matrix (row-major), the
/// `n` eigenvalues, the `n` entries of `q_i`; then `r_1..r_m`.
pub fn random_qcqp(n: usize, m: usize, seed: u64) -> Result<ProblemInstance> {
    if n < 2 || m < 1 {
        return Err(Error::Config(format!("random QCQP needs n >= 2 and m >= 1, got n = {n}, m = {m}")));
    }
    let mut rng = CounterRng::new(seed);
    let mut forms = Vec::with_capacity(m + 1);
    for _ in 0..=m {
        let gauss = DenseMatrix {
            rows: n,
            cols: n,
            data: rng.normal_vec(n * n),
        };
        let basis = orthonormal_columns(&gauss)?;
        let mut eig: Vec<f64> = (0..n).map(|_| rng.uniform_range(0.0, RANDOM_QCQP_EIG_MAX)).collect();
        let imin = (0..n).fold(0, |best, i| if eig[i] < eig[best] { i } else { best });
        eig[imin] = 0.0;
        let q = rng.normal_vec(n);
        forms.push((congruence(&basis, &eig), q));
    }
    let r: Vec<f64> = (0..m).map(|_| -rng.uniform()).collect();
    let mut it = forms.into_iter();
    let (q0_mat, q0) = it.next().expect("m + 1 forms");
    let constraints = it
        .zip(r)
        .map(|((qm, q), ri)| QuadForm::new(Matrix::Dense(qm), q, ri))
        .collect();
    ProblemInstance::new(ProblemData {
        objective: QuadForm::new(Matrix::Dense(q0_mat), q0, 0.0),
        constraints,
        eq_matrix: Matrix::zeros(0, n),
        eq_rhs: vec![],
        primal_set: SimpleSet::cube(n, RANDOM_QCQP_BOX),
        cone: Cone::NonnegOrthant { dim: m },
        dual_domain: DualDomain::Cone,
        mu: 0.0,
    })
}

/// Orthonormal basis of the column space by modified Gram–Schmidt with a
/// second reorthogonalization pass. Columns are returned as rows of the result.
fn orthonormal_columns(a: &DenseMatrix) -> Result<Vec<Vec<f64>>> {
    let n = a.cols;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v: Vec<f64> = (0..a.rows).map(|i| a.get(i, j)).collect();
        for _pass in 0..2 {
            for b in &basis {
                let c = dot(b, &v);
                crate::linalg::axpy(-c, b, &mut v);
            }
        }
        let nv = crate::linalg::norm(&v);
        if nv <= 1e-12 {
            return Err(Error::Data("random matrix is numerically singular".into()));
        }
        v.iter_mut().for_each(|x| *x /= nv);
        basis.push(v);
    }
    Ok(basis)
}

/// `sum_k s_k u_k u_k'` for orthonormal `u_k`, symmetrized exactly.
fn congruence(basis: &[Vec<f64>], eig: &[f64]) -> DenseMatrix {
    let n = basis[0].len();
    let mut out = DenseMatrix::zeros(n, n);
    for (u, s) in basis.iter().zip(eig) {
        if *s == 0.0 {
            continue;
        }
        for i in 0..n {
            let si = s * u[i];
            for j in i..n {
                out.data[i * n + j] += si * u[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            out.data[i * n + j] = out.data[j * n + i];
        }
    }
    out
}

/// Labelled two-class data; rows of `features` are samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DenseMatrix,
    pub labels: Vec<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The first `k` samples.
    pub fn head(&self, k: usize) -> Dataset {
        let k = k.min(self.len());
        let d = self.features.cols;
        Dataset {
            features: DenseMatrix {
                rows: k,
                cols: d,
                data: self.features.data[..k * d].to_vec(),
            },
            labels: self.labels[..k].to_vec(),
        }
    }

    /// Centres each feature column and divides it by its standard deviation;
    /// constant columns are only centred.
    pub fn standardize(&mut self) {
        let (r, d) = (self.features.rows, self.features.cols);
        if r == 0 {
            return;
        }
        for j in 0..d {
            let mean = (0..r).map(|i| self.features.get(i, j)).sum::<f64>() / r as f64;
            let var = (0..r).map(|i| (self.features.get(i, j) - mean).powi(2)).sum::<f64>() / r as f64;
            let sd = var.sqrt();
            for i in 0..r {
                let v = self.features.get(i, j) - mean;
                self.features.set(i, j, if sd > 0.0 { v / sd } else { v });
            }
        }
    }
}

/// Reads CSV rows of features followed by a `+1` / `-1` label. A first row
/// that does not parse as numbers is treated as a header.
pub fn read_dataset_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let vals = match parsed {
            Ok(v) => v,
            Err(_) if line == 0 => continue,
            Err(e) => return Err(Error::Data(format!("line {}: {e}", line + 1))),
        };
        if vals.len() < 2 {
            return Err(Error::Data(format!("line {}: need features and a label", line + 1)));
        }
        let label = *vals.last().expect("non-empty");
        if label != 1.0 && label != -1.0 {
            return Err(Error::Data(format!("line {}: label must be +1 or -1, got {label}", line + 1)));
        }
        labels.push(label);
        rows.push(vals[..vals.len() - 1].to_vec());
    }
    let features = DenseMatrix::from_rows(&rows).map_err(|e| Error::Data(e.to_string()))?;
    Ok(Dataset { features, labels })
}

/// Two Gaussian clouds with means `+-0.5` in every coordinate and unit
/// variance, labels alternating `+1, -1`, standardized.
pub fn synthetic_dataset(samples: usize, dim: usize, seed: u64) -> Dataset {
    let mut rng = CounterRng::new(seed);
    let mut data = Vec::with_capacity(samples * dim);
    let mut labels = Vec::with_capacity(samples);
    for s in 0..samples {
        let label = if s % 2 == 0 { 1.0 } else { -1.0 };
        for _ in 0..dim {
            data.push(0.5 * label + rng.normal());
        }
        labels.push(label);
    }
    let mut ds = Dataset {
        features: DenseMatrix {
            rows: samples,
            cols: dim,
            data,
        },
        labels,
    };
    ds.standardize();
    ds
}

/// The bundled 200-sample, 5-feature desk-scale dataset.
pub fn bundled_dataset() -> Dataset {
    synthetic_dataset(200, 5, 2024)
}

/// The three normalized kernel matrices: polynomial `(1 + a'a')^2`, Gaussian
/// `exp(-0.5 ||a - a'||^2 / 0.1)` and linear `a'a'`.
pub fn normalized_kernels(features: &DenseMatrix) -> Result<[DenseMatrix; 3]> {
    let r = features.rows;
    let mut ks = [DenseMatrix::zeros(r, r), DenseMatrix::zeros(r, r), DenseMatrix::zeros(r, r)];
    for i in 0..r {
        for j in i..r {
            let (a, b) = (features.row(i), features.row(j));
            let ip = dot(a, b);
            let d2 = crate::linalg::dist_sq(a, b);
            let vals = [(1.0 + ip).powi(2), (-0.5 * d2 / 0.1).exp(), ip];
            for (k, v) in ks.iter_mut().zip(vals) {
                k.set(i, j, v);
                k.set(j, i, v);
            }
        }
    }
    for (idx, k) in ks.iter_mut().enumerate() {
        let diag: Vec<f64> = (0..r).map(|i| k.get(i, i)).collect();
        if let Some(i) = diag.iter().position(|d| *d <= 0.0) {
            return Err(Error::Data(format!(
                "kernel {} has a zero diagonal entry at sample {i}; cannot normalize",
                idx + 1
            )));
        }
        for i in 0..r {
            for j in 0..r {
                let v = k.get(i, j) / (diag[i] * diag[j]).sqrt();
                k.set(i, j, v);
            }
        }
    }
    Ok(ks)
}

/// Kernel matrix learning as a min–max problem over `x in {x >= 0, <b, x> = 0}`
/// and weights on the unit simplex:
/// `lambda ||x||^2 - 2 x'1 + sum_i (c / r_i) y_i x'H(K_i)x` with
/// `H(K) = diag(b) K diag(b)` and `r_i = trace(K_i)`. `c` defaults to `sum r_i`.
pub fn kml_instance(data: &Dataset, lambda_reg: f64, c: Option<f64>) -> Result<ProblemInstance> {
    let r = data.len();
    if r == 0 || data.features.rows != r {
        return Err(Error::Data("dataset is empty or inconsistent".into()));
    }
    if !(lambda_reg > 0.0) {
        return Err(Error::Config(format!("lambda must be positive, got {lambda_reg}")));
    }
    let b = &data.labels;
    if b.iter().any(|l| *l != 1.0 && *l != -1.0) {
        return Err(Error::Data("labels must be +1 or -1".into()));
    }
    if !(b.contains(&1.0) && b.contains(&-1.0)) {
        return Err(Error::Data("both classes must be present".into()));
    }
    let kernels = normalized_kernels(&data.features)?;
    let traces: Vec<f64> = kernels.iter().map(|k| (0..r).map(|i| k.get(i, i)).sum()).collect();
    let c = c.unwrap_or_else(|| traces.iter().sum());
    let constraints = kernels
        .iter()
        .zip(&traces)
        .map(|(k, tr)| {
            let scale = 2.0 * c / tr;
            let mut h = DenseMatrix::zeros(r, r);
            for i in 0..r {
                for j in 0..r {
                    h.set(i, j, scale * b[i] * k.get(i, j) * b[j]);
                }
            }
            QuadForm::new(Matrix::Dense(h), vec![0.0; r], 0.0)
        })
        .collect();
    let mut q0 = DenseMatrix::identity(r);
    q0.data.iter_mut().for_each(|v| *v *= 2.0 * lambda_reg);
    ProblemInstance::new(ProblemData {
        objective: QuadForm::new(Matrix::from_dense_auto(q0), vec![-2.0; r], 0.0),
        constraints,
        eq_matrix: Matrix::zeros(0, r),
        eq_rhs: vec![],
        primal_set: SimpleSet::NonnegWithLinearEq { direction: b.clone() },
        cone: Cone::NonnegOrthant { dim: 3 },
        dual_domain: DualDomain::Simplex,
        mu: 2.0 * lambda_reg,
    })
}

/// A test problem with a known saddle point.
#[derive(Debug, Clone)]
pub struct AnalyticCase {
    pub name: &'static str,
    pub instance: ProblemInstance,
    pub solution: Iterate,
    pub f_star: f64,
}

fn dense(rows: &[Vec<f64>]) -> Matrix {
    Matrix::Dense(DenseMatrix::from_rows(rows).expect("rectangular"))
}

fn scaled_identity(n: usize, s: f64) -> Matrix {
    let mut d = DenseMatrix::identity(n);
    d.data.iter_mut().for_each(|v| *v *= s);
    Matrix::Dense(d)
}

/// Problems with closed-form solutions:
///
/// * `ball`: `min ||x - c||^2` s.t. `0.5 ||x||^2 - 0.5 <= 0`, `c = (2, 0)`,
///   `X = [-2, 2]^2`; `x* = (1, 0)`, `lam* = 2`, `f* = 1`.
/// * `box_lp`: `min x1 + 2 x2` s.t. `x1 + x2 - 1.5 <= 0`, `X = [-1, 1]^2`;
///   `x* = (-1, -1)`, `lam* = 0`, `f* = -3`.
/// * `eq_quadratic`: `min 0.5 ||x||^2` s.t. `x1 + x2 + x3 = 1`, `X = [-10, 10]^3`;
///   `x* = (1/3, 1/3, 1/3)`, `v* = -1/3`, `f* = 1/6`.
/// * `strongly_convex_ball`: `min 0.5 ||x - c||^2` with the ball constraint
///   and `mu = 1`; `x* = (1, 0)`, `lam* = 1`, `f* = 0.5`.
pub fn analytic_suite() -> Vec<AnalyticCase> {
    let ball_constraint = || QuadForm::new(scaled_identity(2, 1.0), vec![0.0, 0.0], -0.5);
    let no_eq = |n: usize| (Matrix::zeros(0, n), Vec::new());
    let build = |objective, constraints, (eq_matrix, eq_rhs), primal_set, m: usize, mu| {
        ProblemInstance::new(ProblemData {
            objective,
            constraints,
            eq_matrix,
            eq_rhs,
            primal_set,
            cone: Cone::NonnegOrthant { dim: m },
            dual_domain: DualDomain::Cone,
            mu,
        })
        .expect("analytic instance is valid")
    };
    vec![
        AnalyticCase {
            name: "ball",
            instance: build(
                QuadForm::new(scaled_identity(2, 2.0), vec![-4.0, 0.0], 4.0),
                vec![ball_constraint()],
                no_eq(2),
                SimpleSet::cube(2, 2.0),
                1,
                0.0,
            ),
            solution: Iterate::new(vec![1.0, 0.0], vec![], vec![2.0]),
            f_star: 1.0,
        },
        AnalyticCase {
            name: "box_lp",
            instance: build(
                QuadForm::new(Matrix::zeros(2, 2), vec![1.0, 2.0], 0.0),
                vec![QuadForm::new(Matrix::zeros(2, 2), vec![1.0, 1.0], -1.5)],
                no_eq(2),
                SimpleSet::cube(2, 1.0),
                1,
                0.0,
            ),
            solution: Iterate::new(vec![-1.0, -1.0], vec![], vec![0.0]),
            f_star: -3.0,
        },
        AnalyticCase {
            name: "eq_quadratic",
            instance: build(
                QuadForm::new(scaled_identity(3, 1.0), vec![0.0; 3], 0.0),
                vec![],
                (dense(&[vec![1.0, 1.0, 1.0]]), vec![1.0]),
                SimpleSet::cube(3, 10.0),
                0,
                0.0,
            ),
            solution: Iterate::new(vec![1.0 / 3.0; 3], vec![-1.0 / 3.0], vec![]),
            f_star: 1.0 / 6.0,
        },
        AnalyticCase {
            name: "strongly_convex_ball",
            instance: build(
                QuadForm::new(scaled_identity(2, 1.0), vec![-2.0, 0.0], 2.0),
                vec![ball_constraint()],
                no_eq(2),
                SimpleSet::cube(2, 2.0),
                1,
                1.0,
            ),
            solution: Iterate::new(vec![1.0, 0.0], vec![], vec![1.0]),
            f_star: 0.5,
        },
    ]
}
