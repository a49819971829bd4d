//! Extragradient baseline with one constant stepsize for both blocks.

use crate::diagnostics::{check_termination, metrics_from_eval, Metrics, Termination};
use crate::engine::{project_iterate, TraceRecord};
use crate::error::{Error, Result};
use crate::geometry::DualBall;
use crate::linalg;
use crate::problem::{Iterate, ProblemInstance};
use crate::restart::{fill_subopt, metrics_row};

/// Divergence guard: abort once `||z|| > DIVERGENCE_FACTOR (1 + ||z^0||)`.
pub const DIVERGENCE_FACTOR: f64 = 1e8;

/// The stepsize grid searched when tuning.
pub fn stepsize_grid() -> Vec<f64> {
    vec![1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 0.1, 0.2, 0.5, 1.0]
}

#[derive(Debug, Clone)]
pub struct EgmOptions {
    pub stepsize: f64,
    pub iterations: usize,
    pub dual_ball: DualBall,
    pub termination: Option<Termination>,
    /// Metrics are computed every this many iterations (and at the end).
    pub monitor_every: usize,
}

impl EgmOptions {
    pub fn new(stepsize: f64, iterations: usize) -> Self {
        Self {
            stepsize,
            iterations,
            dual_ball: DualBall::Unbounded,
            termination: None,
            monitor_every: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EgmOutput {
    pub last: Iterate,
    /// Uniform average of the extrapolated points.
    pub average: Iterate,
    pub trace: Vec<TraceRecord>,
    pub iterations: usize,
    /// Operator evaluations (two per iteration).
    pub evals: u64,
    pub converged: bool,
    /// The divergence guard fired.
    pub diverged: bool,
    pub metrics: Metrics,
}

/// `z - s F(z)` followed by the product projection, with
/// `F(z) = (grad_x Phi(z), -grad_y Phi(z))`.
fn eg_step(inst: &ProblemInstance, ball: &DualBall, at: &Iterate, base: &Iterate, s: f64) -> Iterate {
    let e = inst.eval_x(&at.x);
    let gx = e.grad_x(inst, &at.v, &at.lam);
    let mut x = base.x.clone();
    linalg::axpy(-s, &gx, &mut x);
    let mut v = base.v.clone();
    linalg::axpy(s, &e.ax_b, &mut v);
    let mut lam = base.lam.clone();
    linalg::axpy(s, &e.g, &mut lam);
    project_iterate(inst, ball, &Iterate::new(x, v, lam))
}

/// Runs `opts.iterations` extragradient steps from the projection of `z_init`.
pub fn run_egm(inst: &ProblemInstance, z_init: &Iterate, opts: &EgmOptions) -> Result<EgmOutput> {
    let s = opts.stepsize;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Config(format!("EGM stepsize must be non-negative, got {s}")));
    }
    if opts.iterations == 0 {
        return Err(Error::Config("iteration count K must be at least 1".into()));
    }
    inst.check_iterate(z_init)?;
    opts.dual_ball.validate()?;
    let ball = &opts.dual_ball;
    let term = opts.termination.as_ref();
    let mut z = project_iterate(inst, ball, z_init);
    let limit = DIVERGENCE_FACTOR * (1.0 + z.norm());
    let (n, p, m) = (inst.n(), inst.p(), inst.m());
    let mut cum = Iterate::zeros(n, p, m);
    let mut trace = Vec::with_capacity(opts.iterations.min(1 << 16));
    let (mut converged, mut diverged) = (false, false);
    let mut k_done = 0;
    for k in 1..=opts.iterations {
        let half = eg_step(inst, ball, &z, &z, s);
        z = eg_step(inst, ball, &half, &z, s);
        linalg::axpy(1.0, &half.x, &mut cum.x);
        linalg::axpy(1.0, &half.v, &mut cum.v);
        linalg::axpy(1.0, &half.lam, &mut cum.lam);
        k_done = k;
        let mut row = TraceRecord {
            iter: k,
            tau: s,
            sigma: s,
            gamma: 1.0,
            evals: 2 * k as u64,
            tau_trial: s,
            theta: 1.0,
            ..Default::default()
        };
        if !z.norm().is_finite() || z.norm() > limit {
            diverged = true;
            trace.push(row);
            break;
        }
        let monitor = opts.monitor_every > 0 && (k % opts.monitor_every == 0 || k == opts.iterations);
        if monitor || (term.is_some() && k == opts.iterations) {
            let m = egm_metrics(inst, &z, term);
            metrics_row(&mut row, &m, term);
            if let Some(t) = term {
                converged = check_termination(&m, t);
            }
        }
        trace.push(row);
        if converged {
            break;
        }
    }
    let w = 1.0 / k_done as f64;
    let average = Iterate::new(linalg::scale(&cum.x, w), linalg::scale(&cum.v, w), linalg::scale(&cum.lam, w));
    let metrics = egm_metrics(inst, &z, term);
    Ok(EgmOutput {
        last: z,
        average,
        trace,
        iterations: k_done,
        evals: 2 * k_done as u64,
        converged,
        diverged,
        metrics,
    })
}

fn egm_metrics(inst: &ProblemInstance, z: &Iterate, term: Option<&Termination>) -> Metrics {
    let e = inst.eval_x(&z.x);
    let g = e.grad_x(inst, &z.v, &z.lam);
    let mut m = metrics_from_eval(inst, z, &e, &g);
    fill_subopt(&mut m, term);
    m
}
