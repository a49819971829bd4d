//! Fixed-frequency and adaptive restart envelopes around [`Apdb`].

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{check_termination, metrics_from_eval, GapEvaluator, Metrics, Termination};
use crate::engine::{record_from, Apdb, ApdbConfig, TraceRecord};
use crate::error::{Error, Result};
use crate::problem::{Iterate, Mode, ProblemInstance};

/// Which point a restart starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RestartPoint {
    #[default]
    Last,
    Average,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RestartPolicy {
    #[default]
    None,
    Fixed {
        period: usize,
        #[serde(default)]
        point: RestartPoint,
    },
    Adaptive {
        xi: f64,
        q: f64,
        warmup: usize,
        check_period: usize,
        #[serde(default)]
        point: RestartPoint,
    },
}

impl RestartPolicy {
    /// Fixed period used in the random-QCQP experiments.
    pub fn fixed_default(mode: Mode, nonmonotone: bool) -> Self {
        let period = match (mode, nonmonotone) {
            (Mode::Yx, false) => 800,
            (Mode::Xy, false) => 2000,
            (Mode::Yx, true) => 400,
            (Mode::Xy, true) => 1000,
        };
        RestartPolicy::Fixed {
            period,
            point: RestartPoint::Last,
        }
    }

    /// Adaptive schedule used in the random-QCQP experiments.
    pub fn adaptive_default(mode: Mode, nonmonotone: bool) -> Self {
        let (warmup, check_period) = match (mode, nonmonotone) {
            (Mode::Yx, false) => (50, 200),
            (Mode::Yx, true) => (50, 500),
            (Mode::Xy, _) => (100, 500),
        };
        RestartPolicy::Adaptive {
            xi: 0.04,
            q: 0.5,
            warmup,
            check_period,
            point: RestartPoint::Last,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RestartPolicy::None => Ok(()),
            RestartPolicy::Fixed { period: 0, .. } => {
                Err(Error::Config("fixed restart period must be at least 1".into()))
            }
            RestartPolicy::Fixed { .. } => Ok(()),
            RestartPolicy::Adaptive {
                xi, q, check_period, ..
            } => {
                if !(xi > 0.0 && xi.is_finite()) {
                    Err(Error::Config(format!("adaptive restart needs xi > 0, got {xi}")))
                } else if !(q > 0.0 && q < 1.0) {
                    Err(Error::Config(format!("adaptive restart needs q in (0, 1), got {q}")))
                } else if check_period == 0 {
                    Err(Error::Config("adaptive check period must be at least 1".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn point(&self) -> RestartPoint {
        match self {
            RestartPolicy::None => RestartPoint::Last,
            RestartPolicy::Fixed { point, .. } | RestartPolicy::Adaptive { point, .. } => *point,
        }
    }
}

/// Parses `none`, `fixed:K[:last|average]` and
/// `adaptive[:key=value,...]` with keys `xi`, `q`, `warmup`, `check`, `point`.
/// Unspecified adaptive fields take the yx monotone defaults.
impl FromStr for RestartPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::Config(format!("restart policy '{s}': {msg}"));
        let parse_point = |p: &str| match p {
            "last" => Ok(RestartPoint::Last),
            "average" | "avg" => Ok(RestartPoint::Average),
            other => Err(bad(format!("unknown restart point '{other}'"))),
        };
        let mut parts = s.splitn(2, ':');
        let head = parts.next().unwrap_or_default();
        let rest = parts.next();
        let policy = match head {
            "none" => RestartPolicy::None,
            "fixed" => {
                let rest = rest.ok_or_else(|| bad("expected fixed:PERIOD".into()))?;
                let mut it = rest.split(':');
                let period = it
                    .next()
                    .unwrap_or_default()
                    .parse::<usize>()
                    .map_err(|e| bad(e.to_string()))?;
                let point = it.next().map(parse_point).transpose()?.unwrap_or_default();
                RestartPolicy::Fixed { period, point }
            }
            "adaptive" => {
                let mut policy = RestartPolicy::adaptive_default(Mode::Yx, false);
                if let (Some(rest), RestartPolicy::Adaptive {
                    xi,
                    q,
                    warmup,
                    check_period,
                    point,
                }) = (rest, &mut policy)
                {
                    for kv in rest.split(',').filter(|t| !t.is_empty()) {
                        let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("expected key=value, got '{kv}'")))?;
                        let num = || v.parse::<f64>().map_err(|e| bad(format!("{k}: {e}")));
                        let int = || v.parse::<usize>().map_err(|e| bad(format!("{k}: {e}")));
                        match k {
                            "xi" => *xi = num()?,
                            "q" => *q = num()?,
                            "warmup" => *warmup = int()?,
                            "check" | "check_period" => *check_period = int()?,
                            "point" => *point = parse_point(v)?,
                            other => return Err(bad(format!("unknown key '{other}'"))),
                        }
                    }
                }
                policy
            }
            other => return Err(bad(format!("unknown policy '{other}'"))),
        };
        policy.validate()?;
        Ok(policy)
    }
}

/// Why a restart happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trigger {
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartEvent {
    /// Index `t` of the epoch that starts here.
    pub outer: usize,
    /// Total accepted iterations at the restart.
    pub iter: usize,
    pub trigger: Trigger,
    /// Gap of the reference point (adaptive only).
    pub gap_ref: Option<f64>,
    /// Gap of the new start point (adaptive only).
    pub gap_new: Option<f64>,
    /// Subsolver slack bound on `gap_new`.
    pub gap_slack: Option<f64>,
    /// The new start point `z^{t,0}`.
    pub point: Iterate,
    /// The point whose gap was the reference (adaptive only).
    pub reference: Option<Iterate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Maximum number of accepted iterations in total.
    pub budget: usize,
    /// Stop early once this criterion holds at the last iterate.
    pub termination: Option<Termination>,
    /// Metrics are computed every this many iterations (and at the end).
    pub monitor_every: usize,
    /// Carry the last accepted `tau` across restarts instead of resetting to `tau_bar`.
    pub warm_tau: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            budget: 50_000,
            termination: Some(Termination::default()),
            monitor_every: 1,
            warm_tau: false,
        }
    }
}

impl RunOptions {
    pub fn fixed_iterations(k: usize) -> Self {
        Self {
            budget: k,
            termination: None,
            monitor_every: 0,
            warm_tau: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RestartedOutput {
    /// Last iterate.
    pub solution: Iterate,
    /// Ergodic average of the final epoch.
    pub average: Iterate,
    pub trace: Vec<TraceRecord>,
    pub restart_log: Vec<RestartEvent>,
    /// Accepted iterations in total.
    pub iterations: usize,
    pub evals: u64,
    /// The termination criterion was met.
    pub converged: bool,
    /// Metrics at the returned solution.
    pub metrics: Metrics,
}

/// Augments metrics with the relative suboptimality when `f*` is known.
pub fn fill_subopt(m: &mut Metrics, t: Option<&Termination>) {
    if let Some(fs) = t.and_then(|t| t.f_star) {
        m.subopt_abs = Some((m.objective - fs).abs());
    }
}

pub(crate) fn metrics_row(row: &mut TraceRecord, m: &Metrics, t: Option<&Termination>) {
    row.kkt = Some(m.kkt_residual);
    row.infeas = Some(m.infeas);
    row.subopt = t
        .and_then(|t| t.f_star)
        .map(|fs| (m.objective - fs).abs() / (1.0 + fs.abs()));
}

fn current_metrics(solver: &Apdb<'_>, inst: &ProblemInstance, t: Option<&Termination>) -> Metrics {
    let mut m = metrics_from_eval(inst, solver.current(), solver.current_eval(), &solver.current_grad_x());
    fill_subopt(&mut m, t);
    m
}

/// Runs APDB under `policy` for at most `opts.budget` accepted iterations.
pub fn run_restarted(
    inst: &ProblemInstance,
    cfg: &ApdbConfig,
    policy: &RestartPolicy,
    z_init: &Iterate,
    opts: &RunOptions,
) -> Result<RestartedOutput> {
    policy.validate()?;
    if opts.budget == 0 {
        return Err(Error::Config("budget must be at least 1".into()));
    }
    let mut solver = Apdb::new(inst, cfg.clone(), z_init)?;
    let term = opts.termination.as_ref();
    let mut trace = Vec::with_capacity(opts.budget.min(1 << 16));
    let mut log = Vec::new();
    let mut outer = 0usize;
    let mut converged = false;
    let mut gap_eval = match policy {
        RestartPolicy::Adaptive { xi, .. } => Some(GapEvaluator::new(*xi, cfg.dual_ball)),
        _ => None,
    };
    let mut reference: Option<(f64, Iterate)> = None;

    for k in 1..=opts.budget {
        let info = solver.step()?;
        let mut row = record_from(&info, k, solver.evals(), outer);
        let monitor = opts.monitor_every > 0 && (k % opts.monitor_every == 0 || k == opts.budget);
        if monitor || (term.is_some() && k == opts.budget) {
            let m = current_metrics(&solver, inst, term);
            metrics_row(&mut row, &m, term);
            if let Some(t) = term {
                converged = check_termination(&m, t);
            }
        }

        let mut restart_to: Option<(Iterate, Trigger, Option<f64>, Option<f64>, Option<f64>, Option<Iterate>)> = None;
        if !converged && k < opts.budget {
            let candidate = |s: &Apdb<'_>| match policy.point() {
                RestartPoint::Last => s.current().clone(),
                RestartPoint::Average => s.average(),
            };
            match policy {
                RestartPolicy::None => {}
                RestartPolicy::Fixed { period, .. } => {
                    if solver.iterations() % period == 0 {
                        restart_to = Some((candidate(&solver), Trigger::Fixed, None, None, None, None));
                    }
                }
                RestartPolicy::Adaptive {
                    q,
                    warmup,
                    check_period,
                    ..
                } => {
                    let ge = gap_eval.as_mut().expect("adaptive evaluator");
                    if k == *warmup && reference.is_none() {
                        let z = candidate(&solver);
                        let g = ge.evaluate(inst, &z)?;
                        row.gap_xi = Some(g.value);
                        reference = Some((g.value, z));
                    } else if k > *warmup && (k - warmup) % check_period == 0 {
                        let z = candidate(&solver);
                        let g = ge.evaluate(inst, &z)?;
                        row.gap_xi = Some(g.value);
                        match &reference {
                            Some((g_ref, z_ref)) if g.value <= q * g_ref => {
                                restart_to = Some((
                                    z.clone(),
                                    Trigger::Adaptive,
                                    Some(*g_ref),
                                    Some(g.value),
                                    Some(g.slack),
                                    Some(z_ref.clone()),
                                ));
                                reference = Some((g.value, z));
                            }
                            Some(_) => {}
                            None => reference = Some((g.value, z)),
                        }
                    }
                }
            }
        }
        trace.push(row);
        if converged {
            break;
        }
        if let Some((z, trigger, gap_ref, gap_new, gap_slack, reference_point)) = restart_to {
            outer += 1;
            solver.restart(&z, opts.warm_tau);
            let mut row = TraceRecord {
                iter: k,
                tau: solver.state().tau,
                sigma: solver.state().sigma,
                gamma: solver.state().gamma,
                evals: solver.evals(),
                gap_xi: gap_new,
                restart_flag: true,
                tau_trial: solver.state().tau,
                outer,
                ..Default::default()
            };
            if opts.monitor_every > 0 {
                let m = current_metrics(&solver, inst, term);
                metrics_row(&mut row, &m, term);
            }
            trace.push(row);
            log.push(RestartEvent {
                outer,
                iter: k,
                trigger,
                gap_ref,
                gap_new,
                gap_slack,
                point: solver.current().clone(),
                reference: reference_point,
            });
        }
    }
    let iterations = trace.iter().filter(|r| !r.restart_flag).count();
    let metrics = current_metrics(&solver, inst, term);
    Ok(RestartedOutput {
        solution: solver.current().clone(),
        average: solver.average(),
        trace,
        restart_log: log,
        iterations,
        evals: solver.evals(),
        converged,
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;
    use crate::generate::analytic_suite;

    #[test]
    fn none_policy_matches_plain_run() {
        let case = &analytic_suite()[0];
        let inst = &case.instance;
        let z0 = Iterate::zeros(inst.n(), inst.p(), inst.m());
        for mode in [Mode::Xy, Mode::Yx] {
            let cfg = ApdbConfig::defaults(mode).with_nonmonotone(true);
            let a = run(inst, &cfg, &z0, 150).unwrap();
            let b = run_restarted(inst, &cfg, &RestartPolicy::None, &z0, &RunOptions::fixed_iterations(150)).unwrap();
            assert_eq!(a.last, b.solution);
            assert_eq!(a.average, b.average);
            assert_eq!(a.trace, b.trace);
        }
    }

    #[test]
    fn fixed_restarts_every_period() {
        let case = &analytic_suite()[0];
        let inst = &case.instance;
        let z0 = Iterate::zeros(inst.n(), inst.p(), inst.m());
        let policy = RestartPolicy::Fixed {
            period: 5,
            point: RestartPoint::Last,
        };
        let out = run_restarted(
            inst,
            &ApdbConfig::defaults(Mode::Yx),
            &policy,
            &z0,
            &RunOptions::fixed_iterations(23),
        )
        .unwrap();
        let iters: Vec<usize> = out.restart_log.iter().map(|e| e.iter).collect();
        assert_eq!(iters, vec![5, 10, 15, 20]);
        assert_eq!(out.trace.len(), 23 + 4);
        assert_eq!(out.iterations, 23);
        let flagged: Vec<usize> = out.trace.iter().filter(|r| r.restart_flag).map(|r| r.iter).collect();
        assert_eq!(flagged, iters);
    }

    #[test]
    fn restart_resets_gamma_and_tau() {
        let case = &analytic_suite()[3];
        let inst = &case.instance;
        let z0 = Iterate::zeros(inst.n(), inst.p(), inst.m());
        let policy = RestartPolicy::Fixed {
            period: 7,
            point: RestartPoint::Average,
        };
        let cfg = ApdbConfig::defaults(Mode::Yx);
        let out = run_restarted(inst, &cfg, &policy, &z0, &RunOptions::fixed_iterations(20)).unwrap();
        for r in out.trace.iter().filter(|r| r.restart_flag) {
            assert_eq!(r.gamma, cfg.gamma0);
            assert_eq!(r.tau, cfg.tau_bar);
        }
        for e in &out.restart_log {
            assert!(inst.primal_set().contains(&e.point.x, 0.0));
            assert!(e.point.lam.iter().all(|l| *l >= 0.0));
        }
    }

    #[test]
    fn parse_policies() {
        assert_eq!("none".parse::<RestartPolicy>().unwrap(), RestartPolicy::None);
        assert_eq!(
            "fixed:400".parse::<RestartPolicy>().unwrap(),
            RestartPolicy::Fixed {
                period: 400,
                point: RestartPoint::Last
            }
        );
        assert_eq!(
            "fixed:3:average".parse::<RestartPolicy>().unwrap(),
            RestartPolicy::Fixed {
                period: 3,
                point: RestartPoint::Average
            }
        );
        match "adaptive:q=0.25,check=10".parse::<RestartPolicy>().unwrap() {
            RestartPolicy::Adaptive {
                xi, q, check_period, ..
            } => {
                assert_eq!((xi, q, check_period), (0.04, 0.25, 10));
            }
            other => panic!("{other:?}"),
        }
        assert!("fixed:0".parse::<RestartPolicy>().is_err());
        assert!("adaptive:q=1".parse::<RestartPolicy>().is_err());
        assert!("sometimes".parse::<RestartPolicy>().is_err());
    }

    #[test]
    fn policy_json_shape() {
        let p: RestartPolicy = serde_json::from_str(r#"{"type":"fixed","period":800,"point":"last"}"#).unwrap();
        assert_eq!(p, RestartPolicy::fixed_default(Mode::Yx, false));
        let p: RestartPolicy = serde_json::from_str(
            r#"{"type":"adaptive","xi":0.04,"q":0.5,"warmup":50,"check_period":200,"point":"last"}"#,
        )
        .unwrap();
        assert_eq!(p, RestartPolicy::adaptive_default(Mode::Yx, false));
    }

    #[test]
    fn terminates_on_analytic_instance() {
        let case = &analytic_suite()[0];
        let inst = &case.instance;
        let opts = RunOptions {
            budget: 20_000,
            termination: Some(Termination {
                f_star: Some(case.f_star),
                ..Termination::default()
            }),
            ..RunOptions::default()
        };
        let cfg = ApdbConfig::defaults(Mode::Yx).with_nonmonotone(true);
        let out = run_restarted(
            inst,
            &cfg,
            &RestartPolicy::fixed_default(Mode::Yx, true),
            &Iterate::zeros(2, 0, 1),
            &opts,
        )
        .unwrap();
        assert!(out.converged);
        assert!(out.iterations < 20_000);
        assert_eq!(out.trace.last().unwrap().evals, out.evals);
    }
}
