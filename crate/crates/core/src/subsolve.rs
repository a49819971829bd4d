//! Accelerated projected gradient for smooth convex subproblems over a
//! [`SimpleSet`], with a residual certificate and a lower bound on the optimum.

use crate::error::{Error, Result};
use crate::geometry::SimpleSet;
use crate::linalg::{self, dot, DenseMatrix};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 50_000;
const DIVERGENCE_NORM: f64 = 1e12;
const RESIDUAL_CHECK_EVERY: usize = 5;

/// A smooth convex objective `h`.
pub trait SmoothObjective {
    fn dim(&self) -> usize;
    /// Writes `grad h(x)` into `grad` and returns `h(x)`.
    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

/// `h(x) = 0.5 x'Hx + c'x + k`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    pub hessian: DenseMatrix,
    pub linear: Vec<f64>,
    pub constant: f64,
}

impl QuadraticObjective {
    pub fn new(hessian: DenseMatrix, linear: Vec<f64>, constant: f64) -> Self {
        Self {
            hessian,
            linear,
            constant,
        }
    }

    /// Adds `w ||x - center||^2` to the objective.
    pub fn add_proximal(&mut self, w: f64, center: &[f64]) {
        let n = self.linear.len();
        for i in 0..n {
            self.hessian.data[i * n + i] += 2.0 * w;
        }
        linalg::axpy(-2.0 * w, center, &mut self.linear);
        self.constant += w * linalg::norm_sq(center);
    }

    /// Upper estimate of `||H||`.
    pub fn lipschitz(&self) -> f64 {
        let h = &self.hessian;
        linalg::power_iteration(h.rows, |v, out| dense_matvec(h, v, out)) * linalg::NORM_INFLATION
    }
}

fn dense_matvec(h: &DenseMatrix, x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = dot(h.row(i), x);
    }
}

impl SmoothObjective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.linear.len()
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        dense_matvec(&self.hessian, x, grad);
        let quad = 0.5 * dot(x, grad);
        for (g, c) in grad.iter_mut().zip(&self.linear) {
            *g += c;
        }
        quad + dot(&self.linear, x) + self.constant
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsolveOptions {
    /// Target for `||x - P(x - grad h(x) / L)||`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SubsolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Outcome of a subproblem solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub iterations: usize,
    /// Projected-gradient residual at the returned point.
    pub residual: f64,
    pub converged: bool,
    /// `h` at the returned point.
    pub value: f64,
    /// Certified lower bound on `min h`; `-inf` when none is available.
    pub lower_bound: f64,
}

impl Certificate {
    /// `value - lower_bound`, an upper bound on the suboptimality.
    pub fn slack(&self) -> f64 {
        self.value - self.lower_bound
    }
}

/// Minimizes `h` over `set`, where `h` is `sigma`-strongly convex (`sigma`
/// may be 0) with `L`-Lipschitz gradient.
///
/// Nesterov momentum with a function-value restart: whenever an accelerated
/// step would increase `h`, the momentum is dropped and a plain projected
/// gradient step is taken instead, so accepted values never increase.
pub fn solve_strongly_convex(
    obj: &dyn SmoothObjective,
    sigma: f64,
    lipschitz: f64,
    set: &SimpleSet,
    x_init: &[f64],
    opts: &SubsolveOptions,
) -> Result<(Vec<f64>, Certificate)> {
    let n = obj.dim();
    crate::error::check_len("subproblem start", n, x_init.len())?;
    if !(sigma >= 0.0) || !(opts.tol > 0.0) {
        return Err(Error::Config(format!(
            "subsolver needs sigma >= 0 and tol > 0 (sigma = {sigma}, tol = {})",
            opts.tol
        )));
    }
    // A zero Hessian still needs a positive step.
    let lip = lipschitz.max(sigma).max(1e-12);
    let step = 1.0 / lip;
    let momentum_sc = if sigma > 0.0 {
        let (a, b) = (lip.sqrt(), sigma.sqrt());
        Some((a - b) / (a + b))
    } else {
        None
    };

    let mut x = set.project(x_init);
    let mut gx = vec![0.0; n];
    let mut fx = obj.value_grad(&x, &mut gx);
    let mut y = x.clone();
    let mut gy = gx.clone();
    let mut t = 1.0f64;
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut iterations = 0;
    let mut residual = pg_residual(set, &x, &gx, step);
    let mut fresh_grad_at_x = true;

    while residual > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let w: Vec<f64> = y.iter().zip(&gy).map(|(yi, gi)| yi - step * gi).collect();
        x_new.copy_from_slice(&set.project(&w));
        let mut f_new = obj.value_grad(&x_new, &mut g_new);
        if f_new > fx {
            // Restart from x with a plain projected gradient step.
            if !fresh_grad_at_x {
                fx = obj.value_grad(&x, &mut gx);
            }
            let w: Vec<f64> = x.iter().zip(&gx).map(|(xi, gi)| xi - step * gi).collect();
            x_new.copy_from_slice(&set.project(&w));
            f_new = obj.value_grad(&x_new, &mut g_new);
            t = 1.0;
            if f_new > fx {
                // Rounding noise at the optimum.
                break;
            }
        }
        let beta = match momentum_sc {
            Some(b) if t > 1.0 || iterations > 1 => b,
            _ => {
                let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                let b = (t - 1.0) / t_next;
                t = t_next;
                b
            }
        };
        for i in 0..n {
            y[i] = x_new[i] + beta * (x_new[i] - x[i]);
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut gx, &mut g_new);
        fx = f_new;
        fresh_grad_at_x = true;
        if beta == 0.0 {
            gy.copy_from_slice(&gx);
        } else {
            obj.value_grad(&y, &mut gy);
        }
        if linalg::norm(&x) > DIVERGENCE_NORM {
            return Err(Error::Unbounded(format!(
                "subproblem iterates exceed norm {DIVERGENCE_NORM:e} after {iterations} steps"
            )));
        }
        if iterations % RESIDUAL_CHECK_EVERY == 0 || iterations == opts.max_iter {
            residual = pg_residual(set, &x, &gx, step);
        }
    }
    residual = pg_residual(set, &x, &gx, step);
    let lower_bound = lower_bound(obj, sigma, lip, set, &x, &gx, fx);
    Ok((
        x,
        Certificate {
            iterations,
            residual,
            converged: residual <= opts.tol,
            value: fx,
            lower_bound,
        },
    ))
}

fn pg_residual(set: &SimpleSet, x: &[f64], g: &[f64], step: f64) -> f64 {
    let w: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - step * gi).collect();
    linalg::dist(x, &set.project(&w))
}

/// Best of two certified bounds on `min h`:
/// the linearization bound `h(x) + min_u <g, u - x>` (bounded sets), and the
/// strong-convexity bound `h(x+) - ||G||^2 / (2 sigma)` with `G = L (x - x+)`.
fn lower_bound(
    obj: &dyn SmoothObjective,
    sigma: f64,
    lip: f64,
    set: &SimpleSet,
    x: &[f64],
    g: &[f64],
    fx: f64,
) -> f64 {
    let mut best = f64::NEG_INFINITY;
    if let Some(lin) = set.linear_min(g) {
        best = best.max(fx + lin - dot(g, x));
    }
    if sigma > 0.0 {
        let w: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - gi / lip).collect();
        let xp = set.project(&w);
        let mut gp = vec![0.0; x.len()];
        let fp = obj.value_grad(&xp, &mut gp);
        let gmap_sq = lip * lip * linalg::dist_sq(x, &xp);
        best = best.max(fp.min(fx) - gmap_sq / (2.0 * sigma));
    }
    best.min(fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prox_objective(c: &[f64]) -> QuadraticObjective {
        let n = c.len();
        let mut q = QuadraticObjective::new(DenseMatrix::zeros(n, n), vec![0.0; n], 0.0);
        q.add_proximal(0.5, c);
        q
    }

    #[test]
    fn box_prox() {
        let obj = prox_objective(&[2.0, 0.0]);
        let (x, cert) = solve_strongly_convex(
            &obj,
            1.0,
            obj.lipschitz(),
            &SimpleSet::cube(2, 1.0),
            &[0.0, 0.0],
            &SubsolveOptions::default(),
        )
        .unwrap();
        assert!(cert.converged);
        assert!(linalg::dist(&x, &[1.0, 0.0]) < 1e-9);
        assert!((cert.value - 0.5).abs() < 1e-9);
        assert!(cert.lower_bound <= 0.5 + 1e-12 && cert.slack() < 1e-8);
    }

    #[test]
    fn unconstrained_diagonal() {
        let mut h = DenseMatrix::zeros(2, 2);
        h.set(0, 0, 1.0);
        h.set(1, 1, 4.0);
        let obj = QuadraticObjective::new(h, vec![-1.0, -1.0], 0.0);
        let (x, cert) = solve_strongly_convex(
            &obj,
            1.0,
            obj.lipschitz(),
            &SimpleSet::unbounded(2),
            &[5.0, -3.0],
            &SubsolveOptions::default(),
        )
        .unwrap();
        assert!(cert.converged);
        assert!(linalg::dist(&x, &[1.0, 0.25]) < 1e-8);
    }

    #[test]
    fn ball_prox() {
        let obj = prox_objective(&[2.0, 0.0]);
        let set = SimpleSet::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let (x, _) = solve_strongly_convex(&obj, 1.0, obj.lipschitz(), &set, &[0.0, 0.5], &SubsolveOptions::default())
            .unwrap();
        assert!(linalg::dist(&x, &[1.0, 0.0]) < 1e-9);
    }

    #[test]
    fn zero_curvature_on_box() {
        let obj = QuadraticObjective::new(DenseMatrix::zeros(2, 2), vec![1.0, -2.0], 0.0);
        let (x, cert) = solve_strongly_convex(
            &obj,
            0.0,
            obj.lipschitz(),
            &SimpleSet::cube(2, 1.0),
            &[0.0, 0.0],
            &SubsolveOptions::default(),
        )
        .unwrap();
        assert_eq!(x, vec![-1.0, 1.0]);
        assert_eq!(cert.lower_bound, -3.0);
    }

    #[test]
    fn unbounded_below_is_reported() {
        let obj = QuadraticObjective::new(DenseMatrix::zeros(1, 1), vec![-1.0], 0.0);
        let r = solve_strongly_convex(
            &obj,
            0.0,
            obj.lipschitz(),
            &SimpleSet::unbounded(1),
            &[0.0],
            &SubsolveOptions {
                tol: 1e-9,
                max_iter: 1_000_000,
            },
        );
        assert!(matches!(r, Err(Error::Unbounded(_))));
    }
}
