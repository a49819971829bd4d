//! Problem data, coupling-function evaluation and Lipschitz constants.
//!
//! The conic program is
//!
//! ```text
//! min f(x)  s.t.  Ax = b,  g(x) in -K,  x in X
//! ```
//!
//! with quadratic `f = g_0` and `g_i(x) = 0.5 x'Q_i x + q_i'x + r_i`. Its
//! Lagrangian coupling is `Phi(x, v, lam) = f(x) + <v, Ax - b> + <lam, g(x)>`.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::{Cone, DualDomain, SimpleSet};
use crate::linalg::{self, dot, norm, CsrMatrix, DenseMatrix, Matrix};

/// Update order of the primal–dual iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Primal step first, then dual step.
    Xy,
    /// Dual step first, then primal step.
    Yx,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Xy => "xy",
            Mode::Yx => "yx",
        })
    }
}

/// `0.5 x'Qx + q'x + r`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm {
    pub hessian: Matrix,
    pub linear: Vec<f64>,
    pub constant: f64,
}

impl QuadForm {
    pub fn new(hessian: Matrix, linear: Vec<f64>, constant: f64) -> Self {
        Self {
            hessian,
            linear,
            constant,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let qx = self.hessian.matvec(x);
        self.value_with(x, &qx)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.hessian.matvec(x);
        linalg::axpy(1.0, &self.linear, &mut g);
        g
    }

    fn value_with(&self, x: &[f64], qx: &[f64]) -> f64 {
        0.5 * dot(x, qx) + dot(&self.linear, x) + self.constant
    }
}

/// A primal–dual point `z = (x, v, lam)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Iterate {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub lam: Vec<f64>,
}

impl Iterate {
    pub fn new(x: Vec<f64>, v: Vec<f64>, lam: Vec<f64>) -> Self {
        Self { x, v, lam }
    }

    pub fn zeros(n: usize, p: usize, m: usize) -> Self {
        Self::new(vec![0.0; n], vec![0.0; p], vec![0.0; m])
    }

    /// `||(x, v, lam) - (x', v', lam')||`.
    pub fn dist(&self, other: &Iterate) -> f64 {
        (linalg::dist_sq(&self.x, &other.x)
            + linalg::dist_sq(&self.v, &other.v)
            + linalg::dist_sq(&self.lam, &other.lam))
        .sqrt()
    }

    pub fn dual_norm(&self) -> f64 {
        (linalg::norm_sq(&self.v) + linalg::norm_sq(&self.lam)).sqrt()
    }

    pub fn norm(&self) -> f64 {
        (linalg::norm_sq(&self.x) + self.dual_norm().powi(2)).sqrt()
    }
}

/// Everything about `x` the coupling function needs: `Q_i x`, `f(x)`,
/// `g(x)` and `Ax - b`. Built once per primal point and reused for any `y`.
#[derive(Debug, Clone)]
pub struct XEval {
    /// `Q_i x + q_i` for `i = 0..=m`.
    pub grads: Vec<Vec<f64>>,
    pub f: f64,
    pub g: Vec<f64>,
    pub ax_b: Vec<f64>,
}

impl XEval {
    /// `grad_x Phi(x, v, lam)`.
    pub fn grad_x(&self, inst: &ProblemInstance, v: &[f64], lam: &[f64]) -> Vec<f64> {
        let mut out = self.grads[0].clone();
        for (li, gi) in lam.iter().zip(&self.grads[1..]) {
            if *li != 0.0 {
                linalg::axpy(*li, gi, &mut out);
            }
        }
        if inst.p > 0 {
            inst.eq_matrix.matvec_t_acc(1.0, v, &mut out);
        }
        out
    }

    /// `Phi(x, v, lam)`.
    pub fn phi(&self, v: &[f64], lam: &[f64]) -> f64 {
        self.f + dot(v, &self.ax_b) + dot(lam, &self.g)
    }
}

/// Raw problem data before validation.
#[derive(Debug, Clone)]
pub struct ProblemData {
    pub objective: QuadForm,
    pub constraints: Vec<QuadForm>,
    pub eq_matrix: Matrix,
    pub eq_rhs: Vec<f64>,
    pub primal_set: SimpleSet,
    pub cone: Cone,
    pub dual_domain: DualDomain,
    pub mu: f64,
}

/// Validated, immutable problem instance with cached operator norms.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    n: usize,
    m: usize,
    p: usize,
    objective: QuadForm,
    constraints: Vec<QuadForm>,
    eq_matrix: Matrix,
    eq_rhs: Vec<f64>,
    primal_set: SimpleSet,
    cone: Cone,
    dual_domain: DualDomain,
    mu: f64,
    hessian_norms: Vec<f64>,
    a_norm: f64,
    a_sigma_min: f64,
}

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

impl ProblemInstance {
    pub fn new(data: ProblemData) -> Result<Self> {
        let n = data.objective.linear.len();
        if n == 0 {
            return Err(Error::InvalidProblem("number of variables must be positive".into()));
        }
        let m = data.constraints.len();
        let p = data.eq_rhs.len();
        for (i, qf) in std::iter::once(&data.objective).chain(&data.constraints).enumerate() {
            check_len("quadratic form linear term", n, qf.linear.len())?;
            if qf.hessian.rows() != n || qf.hessian.cols() != n {
                return Err(Error::InvalidProblem(format!(
                    "Q[{i}] is {}x{}, expected {n}x{n}",
                    qf.hessian.rows(),
                    qf.hessian.cols()
                )));
            }
            validate_psd(i, &qf.hessian)?;
            if !qf.constant.is_finite() || qf.linear.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidProblem(format!("q[{i}] or r[{i}] is not finite")));
            }
        }
        if data.eq_matrix.rows() != p || (p > 0 && data.eq_matrix.cols() != n) {
            return Err(Error::InvalidProblem(format!(
                "A is {}x{}, expected {p}x{n}",
                data.eq_matrix.rows(),
                data.eq_matrix.cols()
            )));
        }
        let (a_norm, a_sigma_min) = if p > 0 {
            let (rank, smin) = linalg::rank_and_sigma_min(&data.eq_matrix);
            if rank < p {
                return Err(Error::InvalidProblem(format!(
                    "A must have full row rank {p}, numerical rank is {rank}"
                )));
            }
            (data.eq_matrix.spectral_norm(), smin)
        } else {
            (0.0, 0.0)
        };
        data.primal_set.validate(n)?;
        data.cone.validate(m)?;
        if !(data.mu >= 0.0 && data.mu.is_finite()) {
            return Err(Error::InvalidProblem(format!("mu must be nonnegative, got {}", data.mu)));
        }
        if data.mu > 0.0 {
            let lmin = linalg::min_eigenvalue(&data.objective.hessian);
            if data.mu > lmin + PSD_TOL {
                return Err(Error::InvalidProblem(format!(
                    "declared mu = {} exceeds lambda_min(Q0) = {lmin}",
                    data.mu
                )));
            }
        }
        let hessian_norms = std::iter::once(&data.objective)
            .chain(&data.constraints)
            .map(|qf| qf.hessian.spectral_norm_psd())
            .collect();
        Ok(Self {
            n,
            m,
            p,
            objective: data.objective,
            constraints: data.constraints,
            eq_matrix: data.eq_matrix,
            eq_rhs: data.eq_rhs,
            primal_set: data.primal_set,
            cone: data.cone,
            dual_domain: data.dual_domain,
            mu: data.mu,
            hessian_norms,
            a_norm,
            a_sigma_min,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn p(&self) -> usize {
        self.p
    }
    pub fn objective(&self) -> &QuadForm {
        &self.objective
    }
    pub fn constraints(&self) -> &[QuadForm] {
        &self.constraints
    }
    pub fn eq_matrix(&self) -> &Matrix {
        &self.eq_matrix
    }
    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }
    pub fn primal_set(&self) -> &SimpleSet {
        &self.primal_set
    }
    pub fn cone(&self) -> &Cone {
        &self.cone
    }
    pub fn dual_domain(&self) -> DualDomain {
        self.dual_domain
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    /// Upper estimates of `||Q_i||` for `i = 0..=m`.
    pub fn hessian_norms(&self) -> &[f64] {
        &self.hessian_norms
    }
    pub fn a_norm(&self) -> f64 {
        self.a_norm
    }
    /// Smallest singular value of `A` (0 when `p = 0`).
    pub fn a_sigma_min(&self) -> f64 {
        self.a_sigma_min
    }

    pub fn check_iterate(&self, z: &Iterate) -> Result<()> {
        check_len("iterate x", self.n, z.x.len())?;
        check_len("iterate v", self.p, z.v.len())?;
        check_len("iterate lam", self.m, z.lam.len())
    }

    pub fn eval_x(&self, x: &[f64]) -> XEval {
        debug_assert_eq!(x.len(), self.n);
        let mut grads = Vec::with_capacity(self.m + 1);
        let mut g = Vec::with_capacity(self.m);
        let mut f = 0.0;
        for (i, qf) in std::iter::once(&self.objective).chain(&self.constraints).enumerate() {
            let qx = qf.hessian.matvec(x);
            let val = qf.value_with(x, &qx);
            let mut grad = qx;
            linalg::axpy(1.0, &qf.linear, &mut grad);
            if i == 0 {
                f = val;
            } else {
                g.push(val);
            }
            grads.push(grad);
        }
        let ax_b = if self.p > 0 {
            let mut r = self.eq_matrix.matvec(x);
            linalg::axpy(-1.0, &self.eq_rhs, &mut r);
            r
        } else {
            Vec::new()
        };
        XEval { grads, f, g, ax_b }
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.value(x)
    }

    pub fn constraint_values(&self, x: &[f64]) -> Vec<f64> {
        self.constraints.iter().map(|c| c.value(x)).collect()
    }

    pub fn eq_residual(&self, x: &[f64]) -> Vec<f64> {
        if self.p == 0 {
            return Vec::new();
        }
        let mut r = self.eq_matrix.matvec(x);
        linalg::axpy(-1.0, &self.eq_rhs, &mut r);
        r
    }

    /// `Phi(x, y)`.
    pub fn coupling_value(&self, z: &Iterate) -> Result<f64> {
        self.check_iterate(z)?;
        Ok(self.eval_x(&z.x).phi(&z.v, &z.lam))
    }

    /// `grad_x Phi(x, y)`.
    pub fn grad_x_coupling(&self, z: &Iterate) -> Result<Vec<f64>> {
        self.check_iterate(z)?;
        Ok(self.eval_x(&z.x).grad_x(self, &z.v, &z.lam))
    }

    /// `grad_y Phi(x, y) = (Ax - b, g(x))`; independent of `y`.
    pub fn grad_y_coupling(&self, z: &Iterate) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_iterate(z)?;
        let e = self.eval_x(&z.x);
        Ok((e.ax_b, e.g))
    }

    /// Hessian and linear term of `Phi(., v, lam)` as an explicit quadratic
    /// `0.5 x'Hx + c'x + const`.
    pub fn lagrangian_quadratic(&self, v: &[f64], lam: &[f64]) -> (DenseMatrix, Vec<f64>, f64) {
        let mut h = self.objective.hessian.to_dense();
        let mut c = self.objective.linear.clone();
        let mut k = self.objective.constant;
        for (li, qf) in lam.iter().zip(&self.constraints) {
            if *li == 0.0 {
                continue;
            }
            add_scaled(&mut h, *li, &qf.hessian);
            linalg::axpy(*li, &qf.linear, &mut c);
            k += li * qf.constant;
        }
        if self.p > 0 {
            self.eq_matrix.matvec_t_acc(1.0, v, &mut c);
            k -= dot(v, &self.eq_rhs);
        }
        (h, c, k)
    }
}

fn add_scaled(h: &mut DenseMatrix, s: f64, m: &Matrix) {
    match m {
        Matrix::Dense(d) => linalg::axpy(s, &d.data, &mut h.data),
        Matrix::Csr(c) => {
            for i in 0..c.rows {
                for k in c.indptr[i]..c.indptr[i + 1] {
                    h.data[i * h.cols + c.indices[k]] += s * c.data[k];
                }
            }
        }
    }
}

fn validate_psd(i: usize, q: &Matrix) -> Result<()> {
    let d = q.to_dense();
    let scale = 1.0f64.max(q.max_abs());
    for r in 0..d.rows {
        for c in (r + 1)..d.cols {
            if (d.get(r, c) - d.get(c, r)).abs() > SYMMETRY_TOL * scale {
                return Err(Error::InvalidProblem(format!(
                    "Q[{i}] is not symmetric at ({r}, {c})"
                )));
            }
        }
    }
    if d.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidProblem(format!("Q[{i}] has non-finite entries")));
    }
    if q.max_abs() == 0.0 {
        return Ok(());
    }
    let lmin = linalg::min_eigenvalue(q);
    if lmin < -PSD_TOL * scale {
        return Err(Error::InvalidProblem(format!(
            "Q[{i}] is not positive semidefinite: lambda_min = {lmin:e}"
        )));
    }
    Ok(())
}

/// Algorithm parameters that enter the stepsize-floor constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantParams {
    pub c_alpha: f64,
    pub c_beta: f64,
    pub delta: f64,
    pub gamma0: f64,
    /// Estimate of the dual iterate bound in xy-mode; default `10 (1 + ||q_0||)`.
    pub b_bar: Option<f64>,
}

impl ConstantParams {
    pub fn defaults(mode: Mode) -> Self {
        match mode {
            Mode::Xy => Self {
                c_alpha: 0.25,
                c_beta: 0.3,
                delta: 0.4,
                gamma0: 1.0,
                b_bar: None,
            },
            Mode::Yx => Self {
                c_alpha: 0.4,
                c_beta: 0.0,
                delta: 0.5,
                gamma0: 1.0,
                b_bar: None,
            },
        }
    }
}

/// Lipschitz and stepsize-floor constants of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzConstants {
    pub l_f: f64,
    pub l_g: f64,
    pub b_g: f64,
    /// `B_g` stands in for `C_g`.
    pub c_g: f64,
    pub l_xx: f64,
    pub l_xy: f64,
    pub lhat_xx: f64,
    pub lhat_yx: f64,
    pub b_bar: f64,
    /// `+inf` is serialized as `null`.
    #[serde(with = "inf_as_null")]
    pub dual_bound_used: f64,
    pub psi1: f64,
    pub psi2: f64,
    /// `B_g` came from sampling rather than a ball enclosure.
    pub b_g_estimated: bool,
    /// `L_xx` relies on the `B-bar` estimate (xy-mode).
    pub l_xx_estimated: bool,
}

mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Computes every constant for `mode`. In yx-mode a finite dual bound is
/// required unless the multiplier domain is the unit simplex with `p = 0`.
pub fn compute_constants(
    inst: &ProblemInstance,
    mode: Mode,
    dual_bound: Option<f64>,
    params: &ConstantParams,
) -> Result<LipschitzConstants> {
    let norms = inst.hessian_norms();
    let l_f = norms[0];
    let l_g = norms[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    let (b_g, b_g_estimated) = jacobian_bound(inst, l_g);
    let c_g = b_g;
    let b_bar = params
        .b_bar
        .unwrap_or_else(|| 10.0 * (1.0 + norm(&inst.objective().linear)));
    let dual_bound = match dual_bound {
        Some(b) if b.is_finite() && b > 0.0 => Some(b),
        Some(b) if b.is_finite() => {
            return Err(Error::Config(format!("dual bound must be positive, got {b}")))
        }
        _ if inst.dual_domain() == DualDomain::Simplex && inst.p() == 0 => Some(1.0),
        _ => None,
    };
    if mode == Mode::Yx && dual_bound.is_none() {
        return Err(Error::Config(
            "yx-mode constants need a finite dual bound B".into(),
        ));
    }
    let l_xx = l_f + b_bar * l_g;
    let l_xy = inst.a_norm() + b_g;
    let b_hat = dual_bound.unwrap_or(b_bar);
    let lhat_xx = l_f + b_hat * l_g;
    let lhat_yx = inst.a_norm() + c_g;
    let psi1 = psi1(params, l_xx, l_xy);
    let psi2 = psi2(params, lhat_xx, lhat_yx);
    Ok(LipschitzConstants {
        l_f,
        l_g,
        b_g,
        c_g,
        l_xx,
        l_xy,
        lhat_xx,
        lhat_yx,
        b_bar,
        dual_bound_used: dual_bound.unwrap_or(f64::INFINITY),
        psi1,
        psi2,
        b_g_estimated,
        l_xx_estimated: mode == Mode::Xy,
    })
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

/// Stepsize floor of the xy-order iteration (before the factor `eta`).
pub fn psi1(params: &ConstantParams, l_xx: f64, l_xy: f64) -> f64 {
    let slack = 1.0 - (params.c_alpha + params.c_beta + params.delta);
    let a = safe_ratio(
        (params.c_alpha * (1.0 - params.delta)).sqrt(),
        l_xy * params.gamma0.sqrt(),
    );
    let b = safe_ratio((params.c_beta * slack.max(0.0)).sqrt(), l_xx);
    a.min(b)
}

/// Stepsize floor of the yx-order iteration (before the factor `eta`).
///
/// Evaluated in the cancellation-free form
/// `2 (1 - delta) / (Lxx + sqrt(Lxx^2 + 4 (1 - delta) gamma0 / c_alpha * Lyx^2))`,
/// which is algebraically equal to `c_alpha / (2 gamma0) * Lxx / Lyx^2 * zeta`.
pub fn psi2(params: &ConstantParams, lhat_xx: f64, lhat_yx: f64) -> f64 {
    let (ca, d, g0) = (params.c_alpha, params.delta, params.gamma0);
    let root = (lhat_xx * lhat_xx + 4.0 * (1.0 - d) * g0 / ca * lhat_yx * lhat_yx).sqrt();
    safe_ratio(2.0 * (1.0 - d), lhat_xx + root)
}

/// Upper bound on `sup_X ||Jg(x)||`: `||Jg(c)|| + rho L_g` for an enclosing
/// ball `(c, rho)`, or a sampled estimate when `X` is unbounded.
fn jacobian_bound(inst: &ProblemInstance, l_g: f64) -> (f64, bool) {
    if inst.m() == 0 {
        return (0.0, false);
    }
    let jac_norm = |x: &[f64]| -> f64 {
        let e = inst.eval_x(x);
        let rows: Vec<Vec<f64>> = e.grads[1..].to_vec();
        DenseMatrix::from_rows(&rows)
            .map(|d| Matrix::Dense(d).spectral_norm())
            .unwrap_or(f64::INFINITY)
    };
    match inst.primal_set().enclosing_ball(inst.n()) {
        Some((center, radius)) => (jac_norm(&center) + radius * l_g, false),
        None => {
            let mut rng = crate::rng::CounterRng::new(0xB0B);
            let mut best = jac_norm(&inst.primal_set().project(&vec![0.0; inst.n()]));
            for _ in 0..64 {
                let w: Vec<f64> = rng.normal_vec(inst.n()).iter().map(|v| 10.0 * v).collect();
                best = best.max(jac_norm(&inst.primal_set().project(&w)));
            }
            (best, true)
        }
    }
}

// ---------------------------------------------------------------------------
// JSON problem files

/// A matrix in a problem file: rows of a dense matrix, or a CSR object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixJson {
    Dense(Vec<Vec<f64>>),
    Csr(CsrJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrJson {
    pub format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl MatrixJson {
    fn into_matrix(self, rows: usize, cols: usize, what: &str) -> Result<Matrix> {
        match self {
            MatrixJson::Dense(r) => {
                if r.is_empty() {
                    return Ok(Matrix::zeros(rows, cols));
                }
                let d = DenseMatrix::from_rows(&r)?;
                if d.rows != rows || d.cols != cols {
                    return Err(Error::InvalidProblem(format!(
                        "{what} is {}x{}, expected {rows}x{cols}",
                        d.rows, d.cols
                    )));
                }
                Ok(Matrix::from_dense_auto(d))
            }
            MatrixJson::Csr(c) => {
                if c.format != "csr" {
                    return Err(Error::InvalidProblem(format!(
                        "{what}: unknown matrix format {:?}",
                        c.format
                    )));
                }
                let csr = CsrMatrix {
                    rows: c.rows.unwrap_or(rows),
                    cols: c.cols.unwrap_or(cols),
                    indptr: c.indptr,
                    indices: c.indices,
                    data: c.data,
                };
                if csr.rows != rows || csr.cols != cols {
                    return Err(Error::InvalidProblem(format!(
                        "{what} is {}x{}, expected {rows}x{cols}",
                        csr.rows, csr.cols
                    )));
                }
                csr.validate()
                    .map_err(|e| Error::InvalidProblem(format!("{what}: {e}")))?;
                Ok(Matrix::Csr(csr))
            }
        }
    }

    fn from_matrix(m: &Matrix) -> Self {
        match m {
            Matrix::Dense(d) => MatrixJson::Dense((0..d.rows).map(|i| d.row(i).to_vec()).collect()),
            Matrix::Csr(c) => MatrixJson::Csr(CsrJson {
                format: "csr".into(),
                rows: Some(c.rows),
                cols: Some(c.cols),
                indptr: c.indptr.clone(),
                indices: c.indices.clone(),
                data: c.data.clone(),
            }),
        }
    }
}

/// Primal set descriptor as it appears in JSON; `null` bounds are infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SetJson {
    Box {
        lower: Vec<Option<f64>>,
        upper: Vec<Option<f64>>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Simplex {
        scale: f64,
    },
    #[serde(rename = "nonneg_lin_eq")]
    NonnegWithLinearEq {
        direction: Vec<f64>,
    },
}

impl From<SetJson> for SimpleSet {
    fn from(s: SetJson) -> Self {
        match s {
            SetJson::Box { lower, upper } => SimpleSet::Box {
                lower: lower.into_iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)).collect(),
                upper: upper.into_iter().map(|v| v.unwrap_or(f64::INFINITY)).collect(),
            },
            SetJson::Ball { center, radius } => SimpleSet::Ball { center, radius },
            SetJson::Simplex { scale } => SimpleSet::Simplex { scale },
            SetJson::NonnegWithLinearEq { direction } => SimpleSet::NonnegWithLinearEq { direction },
        }
    }
}

impl From<&SimpleSet> for SetJson {
    fn from(s: &SimpleSet) -> Self {
        let fin = |v: &f64| if v.is_finite() { Some(*v) } else { None };
        match s {
            SimpleSet::Box { lower, upper } => SetJson::Box {
                lower: lower.iter().map(fin).collect(),
                upper: upper.iter().map(fin).collect(),
            },
            SimpleSet::Ball { center, radius } => SetJson::Ball {
                center: center.clone(),
                radius: *radius,
            },
            SimpleSet::Simplex { scale } => SetJson::Simplex { scale: *scale },
            SimpleSet::NonnegWithLinearEq { direction } => SetJson::NonnegWithLinearEq {
                direction: direction.clone(),
            },
        }
    }
}

/// On-disk problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub p: usize,
    /// `Q_0, ..., Q_m`.
    #[serde(rename = "Q")]
    pub q_mats: Vec<MatrixJson>,
    /// `q_0, ..., q_m`.
    pub q: Vec<Vec<f64>>,
    /// `r_0, ..., r_m`.
    pub r: Vec<f64>,
    #[serde(rename = "A", default = "empty_matrix")]
    pub a: MatrixJson,
    #[serde(default)]
    pub b: Vec<f64>,
    pub primal_set: SetJson,
    pub cone: Cone,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub dual_domain: DualDomain,
}

fn empty_matrix() -> MatrixJson {
    MatrixJson::Dense(Vec::new())
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Json {
            what: "problem file".into(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem file serializes")
    }

    pub fn into_instance(self) -> Result<ProblemInstance> {
        let (n, m, p) = (self.n, self.m, self.p);
        check_len("Q list (m + 1)", m + 1, self.q_mats.len())?;
        check_len("q list (m + 1)", m + 1, self.q.len())?;
        check_len("r list (m + 1)", m + 1, self.r.len())?;
        check_len("b", p, self.b.len())?;
        let mut forms = Vec::with_capacity(m + 1);
        for (i, ((qm, q), r)) in self.q_mats.into_iter().zip(self.q).zip(self.r).enumerate() {
            check_len("q_i", n, q.len())?;
            forms.push(QuadForm::new(qm.into_matrix(n, n, &format!("Q[{i}]"))?, q, r));
        }
        let objective = forms.remove(0);
        let eq_matrix = self.a.into_matrix(p, n, "A")?;
        ProblemInstance::new(ProblemData {
            objective,
            constraints: forms,
            eq_matrix,
            eq_rhs: self.b,
            primal_set: self.primal_set.into(),
            cone: self.cone,
            dual_domain: self.dual_domain,
            mu: self.mu,
        })
    }

    pub fn from_instance(inst: &ProblemInstance) -> Self {
        let forms: Vec<&QuadForm> = std::iter::once(inst.objective()).chain(inst.constraints()).collect();
        Self {
            n: inst.n(),
            m: inst.m(),
            p: inst.p(),
            q_mats: forms.iter().map(|f| MatrixJson::from_matrix(&f.hessian)).collect(),
            q: forms.iter().map(|f| f.linear.clone()).collect(),
            r: forms.iter().map(|f| f.constant).collect(),
            a: if inst.p() > 0 {
                MatrixJson::from_matrix(inst.eq_matrix())
            } else {
                empty_matrix()
            },
            b: inst.eq_rhs().to_vec(),
            primal_set: inst.primal_set().into(),
            cone: inst.cone().clone(),
            mu: inst.mu(),
            dual_domain: inst.dual_domain(),
        }
    }
}

impl ProblemInstance {
    pub fn from_json(text: &str) -> Result<Self> {
        ProblemFile::from_json(text)?.into_instance()
    }

    pub fn to_json(&self) -> String {
        ProblemFile::from_instance(self).to_json()
    }
}
