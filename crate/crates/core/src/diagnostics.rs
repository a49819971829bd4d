//! Solution-quality measures: KKT residual, infeasibility, the smoothed
//! duality gap, Slater-based dual bounds and termination tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{project_dual, project_simplex, Cone, DualBall, DualDomain};
use crate::linalg::{self, dot, norm};
use crate::problem::{compute_constants, ConstantParams, Iterate, Mode, ProblemInstance, XEval};
use crate::subsolve::{solve_strongly_convex, QuadraticObjective, SubsolveOptions};

/// Relative tolerance for deciding that a second-order-cone multiplier lies
/// on the cone boundary.
const SOC_BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    /// `stationarity + primal_eq + complementarity`.
    pub kkt_residual: f64,
    /// `||x - P_X(x - grad_x Phi)||`.
    pub stationarity: f64,
    /// `||Ax - b||`.
    pub primal_eq: f64,
    pub complementarity: f64,
    /// `dist((Ax - b, -g(x)), {0} x K)`.
    pub infeas: f64,
    pub objective: f64,
    /// Mean positive constraint violation.
    pub mean_violation: f64,
    pub subopt_abs: Option<f64>,
    pub gap_xi: Option<f64>,
}

/// KKT residual and feasibility measures at `z`.
pub fn kkt_residual(inst: &ProblemInstance, z: &Iterate) -> Result<Metrics> {
    inst.check_iterate(z)?;
    let e = inst.eval_x(&z.x);
    let grad = e.grad_x(inst, &z.v, &z.lam);
    Ok(metrics_from_eval(inst, z, &e, &grad))
}

/// Same as [`kkt_residual`] from an existing evaluation of `x` and `grad_x Phi`.
pub fn metrics_from_eval(inst: &ProblemInstance, z: &Iterate, e: &XEval, grad_x: &[f64]) -> Metrics {
    let w = linalg::sub(&z.x, grad_x);
    let stationarity = linalg::dist(&z.x, &inst.primal_set().project(&w));
    let primal_eq = norm(&e.ax_b);
    let complementarity = complementarity(inst.cone(), inst.dual_domain(), &z.lam, &e.g);
    Metrics {
        kkt_residual: stationarity + primal_eq + complementarity,
        stationarity,
        primal_eq,
        complementarity,
        infeas: infeasibility_from(inst, &e.ax_b, &e.g),
        objective: e.f,
        mean_violation: mean_violation(inst, &e.ax_b, &e.g),
        subopt_abs: None,
        gap_xi: None,
    }
}

/// `dist(0, -g + N_{Lambda}(lam))` blockwise, where `Lambda` is the
/// multiplier domain.
pub fn complementarity(cone: &Cone, domain: DualDomain, lam: &[f64], g: &[f64]) -> f64 {
    match domain {
        DualDomain::Simplex => {
            let w: Vec<f64> = lam.iter().zip(g).map(|(l, gi)| l + gi).collect();
            linalg::dist(lam, &project_simplex(&w, 1.0))
        }
        DualDomain::Cone => {
            let mut sq = 0.0;
            cone.for_each_block(|block, off| {
                let d = block.dim();
                let (l, gb) = (&lam[off..off + d], &g[off..off + d]);
                sq += match block {
                    Cone::SecondOrderCone { dim } if *dim > 1 => soc_complementarity_sq(l, gb),
                    _ => l.iter().zip(gb).map(|(a, b)| a.min(-b).powi(2)).sum(),
                };
            });
            sq.sqrt()
        }
    }
}

/// Squared distance from `g` to the normal cone of the second-order cone at
/// `lam`, which is `-K` at the origin, `{0}` in the interior and the ray
/// spanned by `(-1, lam_bar / ||lam_bar||)` on the boundary.
fn soc_complementarity_sq(lam: &[f64], g: &[f64]) -> f64 {
    let lbar = norm(&lam[1..]);
    let scale = 1.0 + lam[0].abs();
    if lam[0] <= SOC_BOUNDARY_TOL * scale && lbar <= SOC_BOUNDARY_TOL * scale {
        let c = Cone::SecondOrderCone { dim: g.len() };
        return linalg::norm_sq(&c.project(g));
    }
    if lam[0] - lbar > SOC_BOUNDARY_TOL * scale {
        return linalg::norm_sq(g);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut d = Vec::with_capacity(g.len());
    d.push(-s);
    d.extend(lam[1..].iter().map(|v| s * v / lbar));
    let t = dot(g, &d).max(0.0);
    (linalg::norm_sq(g) - t * t).max(0.0)
}

/// `sqrt(||Ax - b||^2 + ||P_{K*}(g(x))||^2)`.
pub fn infeasibility(inst: &ProblemInstance, x: &[f64]) -> Result<f64> {
    crate::error::check_len("x", inst.n(), x.len())?;
    Ok(infeasibility_from(inst, &inst.eq_residual(x), &inst.constraint_values(x)))
}

fn infeasibility_from(inst: &ProblemInstance, ax_b: &[f64], g: &[f64]) -> f64 {
    let eq = linalg::norm_sq(ax_b);
    match inst.dual_domain() {
        DualDomain::Simplex => eq.sqrt(),
        DualDomain::Cone => (eq + linalg::norm_sq(&inst.cone().project_dual(g))).sqrt(),
    }
}

/// Mean of the positive constraint violations: `max(g_i, 0)` for orthant
/// entries, the distance to `-K` for each second-order block, and `|Ax - b|_j`
/// for equality rows, averaged over `m + p` rows.
fn mean_violation(inst: &ProblemInstance, ax_b: &[f64], g: &[f64]) -> f64 {
    let mut total: f64 = ax_b.iter().map(|r| r.abs()).sum();
    let mut rows = ax_b.len();
    if inst.dual_domain() == DualDomain::Cone {
        rows += g.len();
        inst.cone().for_each_block(|block, off| {
            let gb = &g[off..off + block.dim()];
            total += match block {
                Cone::SecondOrderCone { dim } if *dim > 1 => norm(&block.project(gb)),
                _ => gb.iter().map(|v| v.max(0.0)).sum(),
            };
        });
    }
    if rows == 0 {
        0.0
    } else {
        total / rows as f64
    }
}

/// Which measure drives termination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// `max(|f - f*| / (1 + |f*|), mean violation) <= eps`; needs `f*`.
    #[default]
    Paper51,
    /// `kkt <= eps` and `infeas <= eps_feas`.
    Conic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Termination {
    pub criterion: Criterion,
    pub eps: f64,
    pub eps_feas: f64,
    pub f_star: Option<f64>,
}

impl Default for Termination {
    fn default() -> Self {
        Self {
            criterion: Criterion::Paper51,
            eps: 1e-7,
            eps_feas: 1e-7,
            f_star: None,
        }
    }
}

impl Termination {
    /// The value compared against `eps` by the relative criterion, if `f*` is known.
    pub fn relative_error(&self, m: &Metrics) -> Option<f64> {
        self.f_star
            .map(|fs| ((m.objective - fs).abs() / (1.0 + fs.abs())).max(m.mean_violation))
    }
}

/// Whether `m` meets the stopping rule. Without `f*` the relative rule falls
/// back to the KKT-based one.
pub fn check_termination(m: &Metrics, t: &Termination) -> bool {
    match (t.criterion, t.relative_error(m)) {
        (Criterion::Paper51, Some(err)) => err <= t.eps,
        _ => m.kkt_residual <= t.eps && m.infeas <= t.eps_feas,
    }
}

/// `Phi(x_bar, y*) - Phi(x*, y_bar)`, the primal–dual gap of `z_bar`
/// measured against a saddle point.
pub fn lagrangian_gap(inst: &ProblemInstance, z_bar: &Iterate, z_star: &Iterate) -> f64 {
    let a = inst.eval_x(&z_bar.x).phi(&z_star.v, &z_star.lam);
    let b = inst.eval_x(&z_star.x).phi(&z_bar.v, &z_bar.lam);
    a - b
}

/// A smoothed-gap evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapValue {
    pub value: f64,
    /// Certified bound on the error of `value` from the x-subproblem.
    pub slack: f64,
    /// The x-subproblem met its residual tolerance.
    pub reliable: bool,
    pub subsolver_iterations: usize,
    pub x_hat: Vec<f64>,
}

/// Self-centred smoothed duality gap
/// `G_xi(z) = [Phi(x, y_hat) - xi ||y_hat - y||^2] - min_{u in X} [Phi(u, y) + xi ||u - x||^2]`,
/// with `y_hat = P(y + grad_y Phi(x) / (2 xi))` in closed form.
pub fn smoothed_gap(
    inst: &ProblemInstance,
    z: &Iterate,
    xi: f64,
    ball: &DualBall,
    tol: f64,
) -> Result<GapValue> {
    smoothed_gap_warm(inst, z, xi, ball, tol, None)
}

fn smoothed_gap_warm(
    inst: &ProblemInstance,
    z: &Iterate,
    xi: f64,
    ball: &DualBall,
    tol: f64,
    x_init: Option<&[f64]>,
) -> Result<GapValue> {
    inst.check_iterate(z)?;
    if !(xi > 0.0) {
        return Err(Error::Config(format!("xi must be positive, got {xi}")));
    }
    let e = inst.eval_x(&z.x);
    let mut vh: Vec<f64> = z.v.iter().zip(&e.ax_b).map(|(v, r)| v + r / (2.0 * xi)).collect();
    let mut lh: Vec<f64> = z.lam.iter().zip(&e.g).map(|(l, g)| l + g / (2.0 * xi)).collect();
    project_dual(inst.cone(), inst.dual_domain(), ball, &mut vh, &mut lh);
    let sup_part = e.phi(&vh, &lh) - xi * (linalg::dist_sq(&vh, &z.v) + linalg::dist_sq(&lh, &z.lam));

    let (h, c, k) = inst.lagrangian_quadratic(&z.v, &z.lam);
    let mut obj = QuadraticObjective::new(h, c, k);
    obj.add_proximal(xi, &z.x);
    let lip = obj.lipschitz();
    let sigma = 2.0 * xi + inst.mu();
    let start = x_init.unwrap_or(&z.x);
    let opts = SubsolveOptions {
        tol,
        ..SubsolveOptions::default()
    };
    let (x_hat, cert) = solve_strongly_convex(&obj, sigma, lip, inst.primal_set(), start, &opts)?;
    Ok(GapValue {
        value: sup_part - cert.value,
        slack: cert.slack(),
        reliable: cert.converged,
        subsolver_iterations: cert.iterations,
        x_hat,
    })
}

/// Smoothed-gap evaluator for one run: warm-starts each x-subproblem from the
/// previous solution and tightens the tolerance to `0.01 xi G` once a gap
/// estimate is known.
#[derive(Debug, Clone)]
pub struct GapEvaluator {
    pub xi: f64,
    pub ball: DualBall,
    pub base_tol: f64,
    /// Smallest tolerance ever requested from the subsolver.
    pub min_tol: f64,
    last_x_hat: Option<Vec<f64>>,
    last_gap: Option<f64>,
}

impl GapEvaluator {
    pub fn new(xi: f64, ball: DualBall) -> Self {
        Self {
            xi,
            ball,
            base_tol: crate::subsolve::DEFAULT_TOL,
            min_tol: 1e-13,
            last_x_hat: None,
            last_gap: None,
        }
    }

    pub fn current_tol(&self) -> f64 {
        match self.last_gap {
            Some(g) if g > 0.0 => self.base_tol.min(0.01 * self.xi * g).max(self.min_tol),
            _ => self.base_tol,
        }
    }

    pub fn evaluate(&mut self, inst: &ProblemInstance, z: &Iterate) -> Result<GapValue> {
        let tol = self.current_tol();
        let g = smoothed_gap_warm(inst, z, self.xi, &self.ball, tol, self.last_x_hat.as_deref())?;
        self.last_x_hat = Some(g.x_hat.clone());
        self.last_gap = Some(g.value);
        Ok(g)
    }
}

/// Interior radius `r* = min { <w, -g> : w in K*, ||w|| = 1 }` of a strictly
/// feasible constraint value `g`.
pub fn slater_radius(cone: &Cone, g_tilde: &[f64]) -> Result<f64> {
    crate::error::check_len("constraint value", cone.dim(), g_tilde.len())?;
    let mut r = f64::INFINITY;
    cone.for_each_block(|block, off| {
        let gb = &g_tilde[off..off + block.dim()];
        let rb = match block {
            Cone::SecondOrderCone { dim } if *dim > 1 => {
                (-gb[0] - norm(&gb[1..])) * std::f64::consts::FRAC_1_SQRT_2
            }
            _ => gb.iter().map(|v| -v).fold(f64::INFINITY, f64::min),
        };
        r = r.min(rb);
    });
    if r <= 0.0 || r.is_nan() {
        return Err(Error::SlaterViolation(format!(
            "-g(x) is not in the interior of K (radius {r})"
        )));
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualBound {
    pub b_lambda: f64,
    pub b_v: f64,
    /// `1.01 sqrt(B_v^2 + B_lambda^2)`; `+inf` without constraints.
    pub b: f64,
    pub slater_radius: f64,
    /// Certified lower bound on `q(v, lam)` used for `B_lambda`.
    pub dual_value: f64,
    pub warnings: Vec<String>,
}

/// Bounds on the norms of dual optimal solutions from a Slater point `x_tilde`
/// and a probe `(v, lam)` in the domain of the dual function.
pub fn dual_bound(
    inst: &ProblemInstance,
    x_tilde: &[f64],
    probe_v: &[f64],
    probe_lam: &[f64],
) -> Result<DualBound> {
    crate::error::check_len("Slater point", inst.n(), x_tilde.len())?;
    crate::error::check_len("probe v", inst.p(), probe_v.len())?;
    crate::error::check_len("probe lam", inst.m(), probe_lam.len())?;
    let mut warnings = Vec::new();
    if inst.m() == 0 && inst.p() == 0 {
        warnings.push("no constraints: the dual bound is infinite".to_string());
        return Ok(DualBound {
            b_lambda: 0.0,
            b_v: 0.0,
            b: f64::INFINITY,
            slater_radius: f64::INFINITY,
            dual_value: f64::NAN,
            warnings,
        });
    }
    if !inst.primal_set().contains(x_tilde, 1e-12) {
        return Err(Error::SlaterViolation("Slater point lies outside X".into()));
    }
    let eq = norm(&inst.eq_residual(x_tilde));
    if eq > 1e-8 * (1.0 + norm(inst.eq_rhs())) {
        return Err(Error::SlaterViolation(format!("Slater point violates Ax = b by {eq:e}")));
    }
    let mut lam_probe = probe_lam.to_vec();
    let mut v_probe = probe_v.to_vec();
    project_dual(inst.cone(), inst.dual_domain(), &DualBall::Unbounded, &mut v_probe, &mut lam_probe);
    if linalg::dist(&lam_probe, probe_lam) > 1e-12 {
        return Err(Error::Config("probe multiplier is outside the dual cone".into()));
    }

    let f_tilde = inst.objective_value(x_tilde);
    let (r_star, b_lambda, dual_value) = match inst.dual_domain() {
        DualDomain::Simplex => (f64::INFINITY, 1.0, f64::NAN),
        DualDomain::Cone if inst.m() == 0 => (f64::INFINITY, 0.0, f64::NAN),
        DualDomain::Cone => {
            let r = slater_radius(inst.cone(), &inst.constraint_values(x_tilde))?;
            let q = dual_function_lower(inst, probe_v, probe_lam)?;
            (r, ((f_tilde - q) / r).max(0.0), q)
        }
    };
    let b_v = if inst.p() > 0 {
        match inst.primal_set().enclosing_ball(inst.n()) {
            Some((center, radius)) => {
                let grad_bound = norm(&inst.objective().gradient(&center)) + radius * inst.hessian_norms()[0];
                let consts = compute_constants(inst, Mode::Xy, None, &ConstantParams::defaults(Mode::Xy))?;
                (grad_bound + consts.c_g * b_lambda) / inst.a_sigma_min()
            }
            None => {
                warnings.push("X is unbounded: no bound on the equality multipliers".into());
                f64::INFINITY
            }
        }
    } else {
        0.0
    };
    Ok(DualBound {
        b_lambda,
        b_v,
        b: crate::linalg::NORM_INFLATION * b_v.hypot(b_lambda),
        slater_radius: r_star,
        dual_value,
        warnings,
    })
}

/// Certified lower bound on the dual function `q(v, lam) = min_X Phi(x, v, lam)`.
pub fn dual_function_lower(inst: &ProblemInstance, v: &[f64], lam: &[f64]) -> Result<f64> {
    let (h, c, k) = inst.lagrangian_quadratic(v, lam);
    let obj = QuadraticObjective::new(h, c, k);
    let lip = obj.lipschitz();
    let start = inst.primal_set().project(&vec![0.0; inst.n()]);
    let opts = SubsolveOptions {
        tol: 1e-10,
        ..SubsolveOptions::default()
    };
    let (_, cert) = solve_strongly_convex(&obj, inst.mu(), lip, inst.primal_set(), &start, &opts)?;
    if !cert.lower_bound.is_finite() {
        return Err(Error::Unbounded(
            "cannot certify a finite dual function value at the probe".into(),
        ));
    }
    Ok(cert.lower_bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::analytic_suite;

    #[test]
    fn slater_examples() {
        let o = Cone::NonnegOrthant { dim: 2 };
        assert_eq!(slater_radius(&o, &[-1.0, -2.0]).unwrap(), 1.0);
        let s = Cone::SecondOrderCone { dim: 3 };
        let r = slater_radius(&s, &[-3.0, 1.0, 0.0]).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(slater_radius(&o, &[-1.0, 0.0]), Err(Error::SlaterViolation(_))));
    }

    #[test]
    fn complementarity_examples() {
        let o = Cone::NonnegOrthant { dim: 2 };
        assert_eq!(complementarity(&o, DualDomain::Cone, &[1.0, 0.0], &[0.0, -2.0]), 0.0);
        let s = Cone::SecondOrderCone { dim: 3 };
        // lam on the boundary, g along the normal ray.
        let c = complementarity(&s, DualDomain::Cone, &[1.0, 1.0, 0.0], &[-2.0, 2.0, 0.0]);
        assert!(c < 1e-14);
        // lam interior: residual is ||g||.
        let c = complementarity(&s, DualDomain::Cone, &[2.0, 1.0, 0.0], &[0.0, 3.0, 4.0]);
        assert!((c - 5.0).abs() < 1e-14);
    }

    #[test]
    fn termination_examples() {
        let t = Termination {
            f_star: Some(0.0),
            ..Termination::default()
        };
        assert!(check_termination(&Metrics::default(), &t));
        let m = Metrics {
            objective: 1e-6,
            ..Metrics::default()
        };
        assert!(!check_termination(&m, &t));
    }

    #[test]
    fn analytic_oracles_have_zero_residual_and_gap() {
        for case in analytic_suite() {
            let m = kkt_residual(&case.instance, &case.solution).unwrap();
            assert!(m.kkt_residual <= 1e-9, "{}: {m:?}", case.name);
            assert!(m.infeas <= 1e-12);
            let g = smoothed_gap(&case.instance, &case.solution, 0.04, &DualBall::Unbounded, 1e-11).unwrap();
            assert!(g.value.abs() <= 1e-7, "{}: {}", case.name, g.value);
        }
    }

    #[test]
    fn ball_instance_gap_positive_away_from_solution() {
        let case = &analytic_suite()[0];
        let z = Iterate::zeros(2, 0, 1);
        let g = smoothed_gap(&case.instance, &z, 0.04, &DualBall::Unbounded, 1e-11).unwrap();
        assert!(g.value > 1e-3);
    }

    #[test]
    fn ball_instance_dual_bound() {
        let case = &analytic_suite()[0];
        let b = dual_bound(&case.instance, &[0.0, 0.0], &[], &[0.0]).unwrap();
        assert!((b.slater_radius - 0.5).abs() < 1e-15);
        assert!((b.b_lambda - 8.0).abs() < 1e-6, "{b:?}");
        assert!(b.b_lambda >= norm(&case.solution.lam));
    }
}
