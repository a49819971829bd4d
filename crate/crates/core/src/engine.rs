//! The accelerated primal–dual iteration with backtracking, in both update
//! orders, with monotone or non-monotone stepsize search and ergodic averaging.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bregman_d, bregman_p, project_dual, DualBall};
use crate::linalg::{self, dist_sq};
use crate::problem::{Iterate, Mode, ProblemInstance, XEval};

pub const DEFAULT_MAX_HALVINGS: usize = 200;

/// How much of the inner search is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceLevel {
    /// One row per accepted iteration.
    #[default]
    Accepted,
    /// Additionally keep every trial of the backtracking loop.
    Debug,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ApdbConfig {
    pub mode: Mode,
    /// Non-monotone stepsize search (`c_nm = 1`).
    pub nonmonotone: bool,
    pub tau_bar: f64,
    pub gamma0: f64,
    pub eta: f64,
    pub c_alpha: f64,
    pub c_beta: f64,
    pub delta: f64,
    pub dual_ball: DualBall,
    pub max_halvings: usize,
    pub trace_level: TraceLevel,
}

impl Default for ApdbConfig {
    fn default() -> Self {
        Self::defaults(Mode::Yx)
    }
}

impl ApdbConfig {
    pub fn defaults(mode: Mode) -> Self {
        let (c_alpha, c_beta, delta) = match mode {
            Mode::Xy => (0.25, 0.3, 0.4),
            Mode::Yx => (0.4, 0.0, 0.5),
        };
        Self {
            mode,
            nonmonotone: false,
            tau_bar: 1.0,
            gamma0: 1.0,
            eta: 0.7,
            c_alpha,
            c_beta,
            delta,
            dual_ball: DualBall::Unbounded,
            max_halvings: DEFAULT_MAX_HALVINGS,
            trace_level: TraceLevel::Accepted,
        }
    }

    pub fn with_nonmonotone(mut self, on: bool) -> Self {
        self.nonmonotone = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        if !(self.tau_bar > 0.0 && self.tau_bar.is_finite()) {
            return bad(format!("tau_bar must be positive, got {}", self.tau_bar));
        }
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return bad(format!("gamma0 must be positive, got {}", self.gamma0));
        }
        if !(self.c_alpha > 0.0) || !(self.c_beta >= 0.0) || !(self.delta >= 0.0 && self.delta < 1.0) {
            return bad(format!(
                "need c_alpha > 0, c_beta >= 0 and delta in [0, 1); got ({}, {}, {})",
                self.c_alpha, self.c_beta, self.delta
            ));
        }
        if self.mode == Mode::Xy {
            if self.c_beta <= 0.0 {
                return bad("xy-mode needs c_beta > 0".into());
            }
            let s = self.c_alpha + self.c_beta + self.delta;
            if s >= 1.0 {
                return bad(format!("xy-mode needs c_alpha + c_beta + delta < 1, got {s}"));
            }
        }
        if self.max_halvings == 0 {
            return bad("max_halvings must be positive".into());
        }
        self.dual_ball.validate()
    }

    pub fn c_nm(&self) -> f64 {
        if self.nonmonotone {
            1.0
        } else {
            0.0
        }
    }
}

/// Mutable stepsize state of the backtracking search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepState {
    /// `tau_{k-1}`.
    pub tau_prev: f64,
    /// `tau_k`: the next trial before a step, the accepted value after it.
    pub tau: f64,
    /// `sigma_{k-1}`.
    pub sigma_prev: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub gamma_next: f64,
    pub theta: f64,
    /// `alpha_k`, `beta_k` from the previous acceptance.
    pub alpha: f64,
    pub alpha_next: f64,
    pub beta: f64,
    pub beta_next: f64,
    pub c_nm: f64,
    pub eta: f64,
    pub tau_bar: f64,
    /// Total test-function evaluations.
    pub backtrack_evals: u64,
    /// `sigma` of the first accepted iteration since the last (re)start.
    pub sigma0: f64,
}

impl StepState {
    fn initial(cfg: &ApdbConfig, tau0: f64) -> Self {
        let sigma_prev = cfg.gamma0 * tau0;
        let (alpha, beta) = match cfg.mode {
            Mode::Xy => (cfg.c_alpha / tau0, cfg.gamma0 * cfg.c_beta / sigma_prev),
            Mode::Yx => (cfg.c_alpha / sigma_prev, 0.0),
        };
        Self {
            tau_prev: tau0,
            tau: tau0,
            sigma_prev,
            sigma: sigma_prev,
            gamma: cfg.gamma0,
            gamma_next: cfg.gamma0,
            theta: 1.0,
            alpha,
            alpha_next: alpha,
            beta,
            beta_next: beta,
            c_nm: cfg.c_nm(),
            eta: cfg.eta,
            tau_bar: cfg.tau_bar,
            backtrack_evals: 0,
            sigma0: f64::NAN,
        }
    }
}

/// Weighted sums realizing the ergodic average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageState {
    pub x_cum: Vec<f64>,
    pub v_cum: Vec<f64>,
    pub lam_cum: Vec<f64>,
    pub total_weight: f64,
}

impl AverageState {
    fn new(n: usize, p: usize, m: usize) -> Self {
        Self {
            x_cum: vec![0.0; n],
            v_cum: vec![0.0; p],
            lam_cum: vec![0.0; m],
            total_weight: 0.0,
        }
    }

    fn add(&mut self, t: f64, z: &Iterate) {
        linalg::axpy(t, &z.x, &mut self.x_cum);
        linalg::axpy(t, &z.v, &mut self.v_cum);
        linalg::axpy(t, &z.lam, &mut self.lam_cum);
        self.total_weight += t;
    }

    /// `cum / T`, or `None` before the first accepted iteration.
    pub fn average(&self) -> Option<Iterate> {
        if self.total_weight <= 0.0 {
            return None;
        }
        let s = 1.0 / self.total_weight;
        Some(Iterate::new(
            linalg::scale(&self.x_cum, s),
            linalg::scale(&self.v_cum, s),
            linalg::scale(&self.lam_cum, s),
        ))
    }
}

/// One trial of the backtracking loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub tau: f64,
    pub sigma: f64,
    pub test_value: f64,
    pub threshold: f64,
}

/// Summary of one accepted iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    /// First trial stepsize `tau_k°`.
    pub tau_trial: f64,
    pub tau: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub theta: f64,
    /// Test evaluations in this iteration (`1 + number of reductions`).
    pub evals: u64,
    pub test_value: f64,
    /// `-(delta / tau) D_p - (delta / sigma) D_d` at acceptance.
    pub threshold: f64,
    pub d_p: f64,
    pub d_d: f64,
    /// Ergodic weight `t_k = sigma_k / sigma_0`.
    pub weight: f64,
    pub trials: Vec<Trial>,
}

/// Per-iteration diagnostics row.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Accepted iterations so far, counted across restarts.
    pub iter: usize,
    pub tau: f64,
    pub sigma: f64,
    pub gamma: f64,
    /// Cumulative test evaluations.
    pub evals: u64,
    pub kkt: Option<f64>,
    pub infeas: Option<f64>,
    pub subopt: Option<f64>,
    pub gap_xi: Option<f64>,
    pub restart_flag: bool,
    pub tau_trial: f64,
    pub halvings: u64,
    pub theta: f64,
    /// Restart index `t`.
    pub outer: usize,
}

/// Gradients carried between iterations for the momentum term.
#[derive(Debug, Clone)]
enum MomentumCache {
    /// `grad_x Phi` at `(x^k, y^k)` and `(x^{k-1}, y^{k-1})`.
    Xy { cur: Vec<f64>, prev: Vec<f64> },
    /// `grad_y Phi` at `x^k` and `x^{k-1}`, stacked `(v, lam)`.
    Yx { cur: Vec<f64>, prev: Vec<f64> },
}

/// A running APDB solver over one instance.
#[derive(Debug, Clone)]
pub struct Apdb<'a> {
    inst: &'a ProblemInstance,
    cfg: ApdbConfig,
    state: StepState,
    z: Iterate,
    ek: XEval,
    cache: MomentumCache,
    avg: AverageState,
    iterations: usize,
}

fn stack(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out
}

impl<'a> Apdb<'a> {
    /// Starts from the projection of `z_init` onto `X x Y-hat`.
    pub fn new(inst: &'a ProblemInstance, cfg: ApdbConfig, z_init: &Iterate) -> Result<Self> {
        cfg.validate()?;
        inst.check_iterate(z_init)?;
        let z = project_iterate(inst, &cfg.dual_ball, z_init);
        let ek = inst.eval_x(&z.x);
        let cache = initial_cache(inst, cfg.mode, &ek, &z);
        let state = StepState::initial(&cfg, cfg.tau_bar);
        Ok(Self {
            inst,
            avg: AverageState::new(inst.n(), inst.p(), inst.m()),
            cfg,
            state,
            z,
            ek,
            cache,
            iterations: 0,
        })
    }

    pub fn config(&self) -> &ApdbConfig {
        &self.cfg
    }
    pub fn state(&self) -> &StepState {
        &self.state
    }
    pub fn current(&self) -> &Iterate {
        &self.z
    }
    /// Cached evaluation of the current primal point.
    pub fn current_eval(&self) -> &XEval {
        &self.ek
    }
    pub fn averages(&self) -> &AverageState {
        &self.avg
    }
    /// Ergodic average since the last (re)start; the current point before any step.
    pub fn average(&self) -> Iterate {
        self.avg.average().unwrap_or_else(|| self.z.clone())
    }
    /// Accepted iterations since the last (re)start.
    pub fn iterations(&self) -> usize {
        self.iterations
    }
    pub fn evals(&self) -> u64 {
        self.state.backtrack_evals
    }

    /// `grad_x Phi` at the current point.
    pub fn current_grad_x(&self) -> Vec<f64> {
        match &self.cache {
            MomentumCache::Xy { cur, .. } => cur.clone(),
            MomentumCache::Yx { .. } => self.ek.grad_x(self.inst, &self.z.v, &self.z.lam),
        }
    }

    /// Reinitializes from `z`: `gamma <- gamma0`, the average is cleared and
    /// `tau` restarts from `tau_bar`, or from the last accepted value when
    /// `warm_tau` is set.
    pub fn restart(&mut self, z: &Iterate, warm_tau: bool) {
        let tau0 = if warm_tau { self.state.tau } else { self.cfg.tau_bar };
        let evals = self.state.backtrack_evals;
        self.z = project_iterate(self.inst, &self.cfg.dual_ball, z);
        self.ek = self.inst.eval_x(&self.z.x);
        self.cache = initial_cache(self.inst, self.cfg.mode, &self.ek, &self.z);
        self.state = StepState::initial(&self.cfg, tau0);
        self.state.backtrack_evals = evals;
        self.avg = AverageState::new(self.inst.n(), self.inst.p(), self.inst.m());
        self.iterations = 0;
    }

    /// Runs the backtracking loop until a trial is accepted.
    pub fn step(&mut self) -> Result<StepInfo> {
        let tau_trial = self.state.tau;
        let mut tau = tau_trial;
        let mut trials = Vec::new();
        let mut halvings = 0usize;
        let debug = self.cfg.trace_level == TraceLevel::Debug;
        loop {
            let cand = self.trial(tau);
            self.state.backtrack_evals += 1;
            if debug {
                trials.push(Trial {
                    tau,
                    sigma: cand.sigma,
                    test_value: cand.test_value,
                    threshold: cand.threshold,
                });
            }
            if cand.test_value <= cand.threshold {
                return Ok(self.accept(cand, tau_trial, halvings as u64 + 1, trials));
            }
            halvings += 1;
            if halvings > self.cfg.max_halvings {
                return Err(Error::Backtracking {
                    iteration: self.iterations,
                    halvings,
                    state: format!(
                        "tau = {tau:e}, sigma = {:e}, gamma = {:e}, last test value = {:e}, threshold = {:e}",
                        cand.sigma, self.state.gamma, cand.test_value, cand.threshold
                    ),
                });
            }
            tau *= self.cfg.eta;
        }
    }

    fn trial(&self, tau: f64) -> Candidate {
        let st = &self.state;
        let sigma = st.gamma * tau;
        let theta = st.sigma_prev / sigma;
        let inst = self.inst;
        let (p, delta) = (inst.p(), self.cfg.delta);
        match &self.cache {
            MomentumCache::Xy { cur, prev } => {
                let alpha_next = self.cfg.c_alpha / tau;
                let beta_next = self.cfg.gamma0 * self.cfg.c_beta / sigma;
                let w: Vec<f64> = (0..inst.n())
                    .map(|i| self.z.x[i] - tau * ((1.0 + theta) * cur[i] - theta * prev[i]))
                    .collect();
                let x = inst.primal_set().project(&w);
                let e = inst.eval_x(&x);
                let mut v: Vec<f64> = (0..p).map(|i| self.z.v[i] + sigma * e.ax_b[i]).collect();
                let mut lam: Vec<f64> = (0..inst.m()).map(|i| self.z.lam[i] + sigma * e.g[i]).collect();
                project_dual(inst.cone(), inst.dual_domain(), &self.cfg.dual_ball, &mut v, &mut lam);
                let g_new = e.grad_x(inst, &v, &lam);
                let g_mid = e.grad_x(inst, &self.z.v, &self.z.lam);
                let d_p = bregman_p(&x, &self.z.x);
                let d_d = bregman_d(&v, &lam, &self.z.v, &self.z.lam);
                let test_value = dist_sq(&g_new, &g_mid) / (2.0 * alpha_next) - d_d / sigma
                    + dist_sq(&g_mid, cur) / (2.0 * beta_next)
                    - (1.0 / tau - theta * (st.alpha + st.beta)) * d_p;
                Candidate {
                    z: Iterate::new(x, v, lam),
                    e,
                    grad: g_new,
                    tau,
                    sigma,
                    theta,
                    alpha_next,
                    beta_next,
                    d_p,
                    d_d,
                    test_value,
                    threshold: -(delta / tau) * d_p - (delta / sigma) * d_d,
                }
            }
            MomentumCache::Yx { cur, prev } => {
                let alpha_next = self.cfg.c_alpha / sigma;
                let s = |i: usize| (1.0 + theta) * cur[i] - theta * prev[i];
                let mut v: Vec<f64> = (0..p).map(|i| self.z.v[i] + sigma * s(i)).collect();
                let mut lam: Vec<f64> = (0..inst.m()).map(|i| self.z.lam[i] + sigma * s(p + i)).collect();
                project_dual(inst.cone(), inst.dual_domain(), &self.cfg.dual_ball, &mut v, &mut lam);
                let gx_old = self.ek.grad_x(inst, &v, &lam);
                let w: Vec<f64> = (0..inst.n()).map(|i| self.z.x[i] - tau * gx_old[i]).collect();
                let x = inst.primal_set().project(&w);
                let e = inst.eval_x(&x);
                let d_p = bregman_p(&x, &self.z.x);
                let d_d = bregman_d(&v, &lam, &self.z.v, &self.z.lam);
                let step = linalg::sub(&x, &self.z.x);
                let gy_new = stack(&e.ax_b, &e.g);
                // Phi is quadratic in x, so its Bregman remainder is
                // 0.5 <grad(x+) - grad(x), x+ - x>; this avoids cancelling
                // two O(|Phi|) values when the step is tiny.
                let gx_new = e.grad_x(inst, &v, &lam);
                let remainder = 0.5 * linalg::dot(&linalg::sub(&gx_new, &gx_old), &step);
                let test_value = remainder - d_p / tau
                    + dist_sq(&gy_new, cur) / (2.0 * alpha_next)
                    - (1.0 / sigma - theta * st.alpha) * d_d;
                Candidate {
                    z: Iterate::new(x, v, lam),
                    e,
                    grad: gy_new,
                    tau,
                    sigma,
                    theta,
                    alpha_next,
                    beta_next: 0.0,
                    d_p,
                    d_d,
                    test_value,
                    threshold: -(delta / tau) * d_p - (delta / sigma) * d_d,
                }
            }
        }
    }

    fn accept(&mut self, c: Candidate, tau_trial: f64, evals: u64, trials: Vec<Trial>) -> StepInfo {
        let st = &mut self.state;
        let tau = c.tau;
        if self.iterations == 0 {
            st.sigma0 = c.sigma;
        }
        let weight = c.sigma / st.sigma0;
        self.avg.add(weight, &c.z);
        st.sigma = c.sigma;
        st.theta = c.theta;
        st.alpha_next = c.alpha_next;
        st.beta_next = c.beta_next;
        let info = StepInfo {
            tau_trial,
            tau,
            sigma: c.sigma,
            gamma: st.gamma,
            theta: c.theta,
            evals,
            test_value: c.test_value,
            threshold: c.threshold,
            d_p: c.d_p,
            d_d: c.d_d,
            weight,
            trials,
        };
        // Line 16: gamma and tau for the next iteration.
        st.gamma_next = st.gamma * (1.0 + self.inst.mu() * tau);
        let tau_next = tau * ((st.gamma / st.gamma_next) * (1.0 + st.c_nm * tau / st.tau_prev)).sqrt();
        st.tau_prev = tau;
        st.tau = tau_next;
        st.sigma_prev = c.sigma;
        st.gamma = st.gamma_next;
        st.alpha = c.alpha_next;
        st.beta = c.beta_next;
        self.cache = match std::mem::replace(&mut self.cache, MomentumCache::Xy { cur: vec![], prev: vec![] }) {
            MomentumCache::Xy { cur, .. } => MomentumCache::Xy { cur: c.grad, prev: cur },
            MomentumCache::Yx { cur, .. } => MomentumCache::Yx { cur: c.grad, prev: cur },
        };
        self.z = c.z;
        self.ek = c.e;
        self.iterations += 1;
        info
    }

    /// The accepted stepsize of the last step (the next trial is `state().tau`).
    pub fn last_tau(&self) -> f64 {
        self.state.tau_prev
    }
}

struct Candidate {
    z: Iterate,
    e: XEval,
    /// xy: `grad_x Phi(x+, y+)`; yx: `grad_y Phi(x+)`.
    grad: Vec<f64>,
    tau: f64,
    sigma: f64,
    theta: f64,
    alpha_next: f64,
    beta_next: f64,
    d_p: f64,
    d_d: f64,
    test_value: f64,
    threshold: f64,
}

fn initial_cache(inst: &ProblemInstance, mode: Mode, e: &XEval, z: &Iterate) -> MomentumCache {
    match mode {
        Mode::Xy => {
            let g = e.grad_x(inst, &z.v, &z.lam);
            MomentumCache::Xy { cur: g.clone(), prev: g }
        }
        Mode::Yx => {
            let g = stack(&e.ax_b, &e.g);
            MomentumCache::Yx { cur: g.clone(), prev: g }
        }
    }
}

/// Projection onto `X x Y-hat`.
pub fn project_iterate(inst: &ProblemInstance, ball: &DualBall, z: &Iterate) -> Iterate {
    let x = inst.primal_set().project(&z.x);
    let mut v = z.v.clone();
    let mut lam = z.lam.clone();
    project_dual(inst.cone(), inst.dual_domain(), ball, &mut v, &mut lam);
    Iterate::new(x, v, lam)
}

/// Result of a plain run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub average: Iterate,
    pub last: Iterate,
    pub trace: Vec<TraceRecord>,
    pub steps: Vec<StepInfo>,
    pub total_weight: f64,
    pub evals: u64,
}

pub fn record_from(step: &StepInfo, iter: usize, evals: u64, outer: usize) -> TraceRecord {
    TraceRecord {
        iter,
        tau: step.tau,
        sigma: step.sigma,
        gamma: step.gamma,
        evals,
        restart_flag: false,
        tau_trial: step.tau_trial,
        halvings: step.evals - 1,
        theta: step.theta,
        outer,
        ..Default::default()
    }
}

/// Executes `k` accepted iterations from `z_init`.
pub fn run(inst: &ProblemInstance, cfg: &ApdbConfig, z_init: &Iterate, k: usize) -> Result<RunOutput> {
    if k == 0 {
        return Err(Error::Config("iteration count K must be at least 1".into()));
    }
    let mut solver = Apdb::new(inst, cfg.clone(), z_init)?;
    let mut trace = Vec::with_capacity(k);
    let mut steps = Vec::with_capacity(k);
    for it in 1..=k {
        let info = solver.step()?;
        trace.push(record_from(&info, it, solver.evals(), 0));
        steps.push(info);
    }
    Ok(RunOutput {
        average: solver.average(),
        last: solver.current().clone(),
        trace,
        steps,
        total_weight: solver.averages().total_weight,
        evals: solver.evals(),
    })
}
