//! Experiment plumbing: solver selection by name, run summaries, reference
//! solutions, seed batches and comparison tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{Criterion, Metrics, Termination};
use crate::egm::{run_egm, stepsize_grid, EgmOptions};
use crate::engine::{ApdbConfig, TraceRecord};
use crate::error::{Error, Result};
use crate::generate::random_qcqp;
use crate::problem::{Iterate, Mode, ProblemInstance};
use crate::restart::{run_restarted, RestartEvent, RestartPolicy, RunOptions};

/// Restart family selected by a solver name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RestartKind {
    None,
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SolverSpec {
    Apdb {
        mode: Mode,
        nonmonotone: bool,
        restart: RestartKind,
    },
    /// A missing stepsize means "tune over the grid".
    Egm { stepsize: Option<f64> },
}

/// Names: `apdb-xy`, `apdb-yx`, `rapdb-xy`, `rapdb-yx`, `rapdb-xy-ada`,
/// `rapdb-yx-ada`, each with an optional `-nm` suffix for the non-monotone
/// search; `egm` or `egm:STEPSIZE`.
impl FromStr for SolverSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("egm") {
            let stepsize = match rest.strip_prefix(':') {
                Some(v) => Some(v.parse::<f64>().map_err(|e| Error::Config(format!("solver '{s}': {e}")))?),
                None if rest.is_empty() => None,
                None => return Err(Error::Config(format!("unknown solver '{s}'"))),
            };
            return Ok(SolverSpec::Egm { stepsize });
        }
        let (base, nonmonotone) = match s.strip_suffix("-nm") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let (mode, restart) = match base {
            "apdb-xy" => (Mode::Xy, RestartKind::None),
            "apdb-yx" => (Mode::Yx, RestartKind::None),
            "rapdb-xy" => (Mode::Xy, RestartKind::Fixed),
            "rapdb-yx" => (Mode::Yx, RestartKind::Fixed),
            "rapdb-xy-ada" => (Mode::Xy, RestartKind::Adaptive),
            "rapdb-yx-ada" => (Mode::Yx, RestartKind::Adaptive),
            _ => return Err(Error::Config(format!("unknown solver '{s}'"))),
        };
        Ok(SolverSpec::Apdb {
            mode,
            nonmonotone,
            restart,
        })
    }
}

impl std::fmt::Display for SolverSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverSpec::Egm { stepsize: None } => write!(f, "egm"),
            SolverSpec::Egm { stepsize: Some(s) } => write!(f, "egm:{s}"),
            SolverSpec::Apdb {
                mode,
                nonmonotone,
                restart,
            } => {
                let prefix = if *restart == RestartKind::None { "apdb" } else { "rapdb" };
                let ada = if *restart == RestartKind::Adaptive { "-ada" } else { "" };
                let nm = if *nonmonotone { "-nm" } else { "" };
                write!(f, "{prefix}-{mode}{ada}{nm}")
            }
        }
    }
}

impl SolverSpec {
    pub fn with_nonmonotone(self, on: bool) -> Self {
        match self {
            SolverSpec::Apdb { mode, restart, .. } => SolverSpec::Apdb {
                mode,
                nonmonotone: on,
                restart,
            },
            egm => egm,
        }
    }

    /// The restart policy with the experiment defaults for this variant.
    pub fn default_policy(&self) -> RestartPolicy {
        match *self {
            SolverSpec::Apdb {
                mode,
                nonmonotone,
                restart: RestartKind::Fixed,
            } => RestartPolicy::fixed_default(mode, nonmonotone),
            SolverSpec::Apdb {
                mode,
                nonmonotone,
                restart: RestartKind::Adaptive,
            } => RestartPolicy::adaptive_default(mode, nonmonotone),
            _ => RestartPolicy::None,
        }
    }

    pub fn default_config(&self) -> Option<ApdbConfig> {
        match *self {
            SolverSpec::Apdb { mode, nonmonotone, .. } => Some(ApdbConfig::defaults(mode).with_nonmonotone(nonmonotone)),
            SolverSpec::Egm { .. } => None,
        }
    }
}

/// Final state of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub solver: String,
    pub seed: Option<u64>,
    pub iterations: usize,
    /// Test-function evaluations (APDB) or operator evaluations (EGM).
    pub evals: u64,
    pub converged: bool,
    pub wall_time_s: f64,
    pub restarts: usize,
    /// EGM stepsize actually used.
    pub stepsize: Option<f64>,
    pub metrics: Metrics,
}

impl RunSummary {
    pub fn evals_per_iteration(&self) -> f64 {
        if self.iterations == 0 {
            0.0
        } else {
            self.evals as f64 / self.iterations as f64
        }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub summary: RunSummary,
    pub solution: Iterate,
    pub trace: Vec<TraceRecord>,
    pub restart_log: Vec<RestartEvent>,
}

/// Overrides applied on top of the variant defaults.
#[derive(Debug, Clone, Default)]
pub struct SolverOverrides {
    pub config: Option<ApdbConfig>,
    pub policy: Option<RestartPolicy>,
}

/// Runs one solver. EGM without a stepsize is tuned over [`stepsize_grid`]:
/// the converged run with the fewest iterations wins, otherwise the run with
/// the smallest final KKT residual.
pub fn run_solver(
    inst: &ProblemInstance,
    spec: &SolverSpec,
    z_init: &Iterate,
    opts: &RunOptions,
    overrides: &SolverOverrides,
) -> Result<RunResult> {
    let start = Instant::now();
    match spec {
        SolverSpec::Apdb { .. } => {
            let cfg = overrides
                .config
                .clone()
                .or_else(|| spec.default_config())
                .expect("APDB config");
            let policy = overrides.policy.clone().unwrap_or_else(|| spec.default_policy());
            let out = run_restarted(inst, &cfg, &policy, z_init, opts)?;
            Ok(RunResult {
                summary: RunSummary {
                    solver: spec.to_string(),
                    seed: None,
                    iterations: out.iterations,
                    evals: out.evals,
                    converged: out.converged,
                    wall_time_s: start.elapsed().as_secs_f64(),
                    restarts: out.restart_log.len(),
                    stepsize: None,
                    metrics: out.metrics,
                },
                solution: out.solution,
                trace: out.trace,
                restart_log: out.restart_log,
            })
        }
        SolverSpec::Egm { stepsize } => {
            let grid = match stepsize {
                Some(s) => vec![*s],
                None => stepsize_grid(),
            };
            let mut best: Option<(f64, crate::egm::EgmOutput)> = None;
            for s in grid {
                let eopts = EgmOptions {
                    stepsize: s,
                    iterations: opts.budget,
                    dual_ball: overrides.config.as_ref().map(|c| c.dual_ball).unwrap_or_default(),
                    termination: opts.termination,
                    monitor_every: opts.monitor_every,
                };
                let out = run_egm(inst, z_init, &eopts)?;
                let better = match &best {
                    None => true,
                    Some((_, b)) => match (out.converged, b.converged) {
                        (true, false) => true,
                        (true, true) => out.iterations < b.iterations,
                        (false, false) => {
                            !out.diverged && (b.diverged || out.metrics.kkt_residual < b.metrics.kkt_residual)
                        }
                        (false, true) => false,
                    },
                };
                if better {
                    best = Some((s, out));
                }
            }
            let (s, out) = best.expect("non-empty grid");
            Ok(RunResult {
                summary: RunSummary {
                    solver: spec.to_string(),
                    seed: None,
                    iterations: out.iterations,
                    evals: out.evals,
                    converged: out.converged,
                    wall_time_s: start.elapsed().as_secs_f64(),
                    restarts: 0,
                    stepsize: Some(s),
                    metrics: out.metrics,
                },
                solution: out.last,
                trace: out.trace,
                restart_log: Vec::new(),
            })
        }
    }
}

/// A high-accuracy solution used as `f*`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Reference {
    pub solution: Iterate,
    pub f_star: f64,
    pub kkt_residual: f64,
    pub converged: bool,
}

pub const REFERENCE_TOL: f64 = 1e-10;
pub const REFERENCE_BUDGET: usize = 300_000;

/// Solves to `kkt <= 1e-10` with restarted non-monotone APDB-yx.
pub fn reference_solution(inst: &ProblemInstance) -> Result<Reference> {
    let spec = SolverSpec::Apdb {
        mode: Mode::Yx,
        nonmonotone: true,
        restart: RestartKind::Fixed,
    };
    let opts = RunOptions {
        budget: REFERENCE_BUDGET,
        termination: Some(Termination {
            criterion: Criterion::Conic,
            eps: REFERENCE_TOL,
            eps_feas: REFERENCE_TOL,
            f_star: None,
        }),
        monitor_every: 10,
        warm_tau: false,
    };
    let z0 = Iterate::zeros(inst.n(), inst.p(), inst.m());
    let r = run_solver(inst, &spec, &z0, &opts, &SolverOverrides::default())?;
    Ok(Reference {
        f_star: r.summary.metrics.objective,
        kkt_residual: r.summary.metrics.kkt_residual,
        converged: r.summary.converged,
        solution: r.solution,
    })
}

/// Median of `values`; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[k] } else { 0.5 * (v[k - 1] + v[k]) })
}

/// One row of a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: String,
    pub seed: Option<u64>,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub evals_per_iteration: f64,
    pub converged: bool,
}

/// One row per summary, in input order.
pub fn compare_table(summaries: &[RunSummary]) -> Vec<TableRow> {
    summaries
        .iter()
        .map(|s| TableRow {
            method: s.solver.clone(),
            seed: s.seed,
            iterations: s.iterations,
            wall_time_s: s.wall_time_s,
            evals_per_iteration: s.evals_per_iteration(),
            converged: s.converged,
        })
        .collect()
}

/// Median iteration count per solver name.
pub fn median_iterations(summaries: &[RunSummary]) -> BTreeMap<String, f64> {
    let mut by: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for s in summaries {
        by.entry(s.solver.clone()).or_default().push(s.iterations as f64);
    }
    by.into_iter()
        .map(|(k, v)| (k, median(&v).expect("non-empty group")))
        .collect()
}

/// Plain-text rendering of a comparison table.
pub fn render_table(rows: &[TableRow]) -> String {
    let mut out = format!(
        "{:<22} {:>6} {:>10} {:>10} {:>12} {:>5}\n",
        "method", "seed", "iters", "time[s]", "evals/iter", "conv"
    );
    for r in rows {
        let seed = r.seed.map(|s| s.to_string()).unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:<22} {:>6} {:>10} {:>10.3} {:>12.3} {:>5}\n",
            r.method, seed, r.iterations, r.wall_time_s, r.evals_per_iteration, r.converged
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub n: usize,
    pub m: usize,
    pub seeds: Vec<u64>,
    pub f_star: BTreeMap<u64, f64>,
    pub runs: Vec<RunSummary>,
    pub table: Vec<TableRow>,
    pub median_iterations: BTreeMap<String, f64>,
}

/// Options for a seed batch on random QCQPs.
#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub n: usize,
    pub m: usize,
    pub seeds: Vec<u64>,
    pub solvers: Vec<SolverSpec>,
    pub eps: f64,
    pub budget: usize,
    pub monitor_every: usize,
    pub threads: usize,
}

/// Runs every solver on every seed with the relative termination rule and
/// `f*` from [`reference_solution`]. Seeds are distributed over `threads`
/// workers; the result order does not depend on the thread count.
pub fn bench_random_qcqp(opts: &BenchOptions) -> Result<BenchReport> {
    bench_random_qcqp_with(opts, &|_, _| Ok(()))
}

/// [`bench_random_qcqp`] with a callback invoked on every finished run, from
/// the worker thread that produced it.
pub fn bench_random_qcqp_with(
    opts: &BenchOptions,
    on_run: &(dyn Fn(u64, &RunResult) -> Result<()> + Sync),
) -> Result<BenchReport> {
    let threads = opts.threads.max(1).min(opts.seeds.len().max(1));
    let per_seed = |seed: u64| -> Result<(f64, Vec<RunSummary>)> {
        let inst = random_qcqp(opts.n, opts.m, seed)?;
        let reference = reference_solution(&inst)?;
        let run_opts = RunOptions {
            budget: opts.budget,
            termination: Some(Termination {
                criterion: Criterion::Paper51,
                eps: opts.eps,
                eps_feas: opts.eps,
                f_star: Some(reference.f_star),
            }),
            monitor_every: opts.monitor_every,
            warm_tau: false,
        };
        let z0 = Iterate::zeros(inst.n(), inst.p(), inst.m());
        let mut runs = Vec::with_capacity(opts.solvers.len());
        for spec in &opts.solvers {
            let mut r = run_solver(&inst, spec, &z0, &run_opts, &SolverOverrides::default())?;
            r.summary.seed = Some(seed);
            on_run(seed, &r)?;
            runs.push(r.summary);
        }
        Ok((reference.f_star, runs))
    };
    let mut results: Vec<Option<Result<(f64, Vec<RunSummary>)>>> = (0..opts.seeds.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<_> = results.chunks_mut(opts.seeds.len().div_ceil(threads).max(1)).collect();
        let mut offset = 0;
        for chunk in chunks {
            let seeds = &opts.seeds[offset..offset + chunk.len()];
            offset += chunk.len();
            let per_seed = &per_seed;
            scope.spawn(move || {
                for (slot, seed) in chunk.iter_mut().zip(seeds) {
                    *slot = Some(per_seed(*seed));
                }
            });
        }
    });
    let mut f_star = BTreeMap::new();
    let mut runs = Vec::new();
    for (seed, r) in opts.seeds.iter().zip(results) {
        let (fs, rs) = r.expect("every seed ran")?;
        f_star.insert(*seed, fs);
        runs.extend(rs);
    }
    Ok(BenchReport {
        n: opts.n,
        m: opts.m,
        seeds: opts.seeds.clone(),
        f_star,
        table: compare_table(&runs),
        median_iterations: median_iterations(&runs),
        runs,
    })
}

pub const TRACE_COLUMNS: [&str; 10] = [
    "iter",
    "tau",
    "sigma",
    "gamma",
    "evals",
    "kkt",
    "infeas",
    "subopt",
    "gap_xi",
    "restart_flag",
];

/// Writes the trace as CSV with [`TRACE_COLUMNS`]; missing values are empty.
pub fn write_trace_csv<W: Write>(out: W, trace: &[TraceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in trace {
        w.write_record([
            r.iter.to_string(),
            format!("{:e}", r.tau),
            format!("{:e}", r.sigma),
            format!("{:e}", r.gamma),
            r.evals.to_string(),
            opt(r.kkt),
            opt(r.infeas),
            opt(r.subopt),
            opt(r.gap_xi),
            u8::from(r.restart_flag).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace written by [`write_trace_csv`].
pub fn read_trace_csv<R: std::io::Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(TRACE_COLUMNS) {
        return Err(Error::Data(format!("unexpected trace header: {headers:?}")));
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str, e: String| Error::Data(format!("trace line {}: {what}: {e}", line + 2));
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(TRACE_COLUMNS[i], e.to_string()));
        let opt = |i: usize| {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        out.push(TraceRecord {
            iter: rec[0].parse().map_err(|e: std::num::ParseIntError| bad("iter", e.to_string()))?,
            tau: num(1)?,
            sigma: num(2)?,
            gamma: num(3)?,
            evals: rec[4].parse().map_err(|e: std::num::ParseIntError| bad("evals", e.to_string()))?,
            kkt: opt(5)?,
            infeas: opt(6)?,
            subopt: opt(7)?,
            gap_xi: opt(8)?,
            restart_flag: &rec[9] == "1",
            ..Default::default()
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_names_round_trip() {
        for name in [
            "apdb-xy",
            "apdb-yx-nm",
            "rapdb-yx",
            "rapdb-xy-nm",
            "rapdb-yx-ada",
            "rapdb-xy-ada-nm",
            "egm",
            "egm:0.01",
        ] {
            let spec: SolverSpec = name.parse().unwrap();
            assert_eq!(spec.to_string(), name);
        }
        assert!("pdhg".parse::<SolverSpec>().is_err());
        assert!("egm0.1".parse::<SolverSpec>().is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }

    fn summary(name: &str, iters: usize) -> RunSummary {
        RunSummary {
            solver: name.into(),
            seed: Some(0),
            iterations: iters,
            evals: 2 * iters as u64,
            converged: true,
            wall_time_s: 0.0,
            restarts: 0,
            stepsize: None,
            metrics: Metrics::default(),
        }
    }

    #[test]
    fn table_has_one_row_per_summary() {
        assert!(compare_table(&[]).is_empty());
        let rows = compare_table(&[summary("a", 10), summary("b", 20), summary("a", 30)]);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1].evals_per_iteration, 2.0);
        let med = median_iterations(&[summary("a", 10), summary("b", 20), summary("a", 30)]);
        assert_eq!(med["a"], 20.0);
        assert_eq!(med["b"], 20.0);
    }

    #[test]
    fn trace_csv_round_trip() {
        let rows = vec![
            TraceRecord {
                iter: 1,
                tau: 0.5,
                sigma: 0.5,
                gamma: 1.0,
                evals: 3,
                kkt: Some(1e-3),
                infeas: Some(0.0),
                ..Default::default()
            },
            TraceRecord {
                iter: 1,
                tau: 1.0,
                sigma: 1.0,
                gamma: 1.0,
                evals: 3,
                restart_flag: true,
                gap_xi: Some(2.5e-4),
                ..Default::default()
            },
        ];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("iter,tau,sigma,gamma,evals,kkt,infeas,subopt,gap_xi,restart_flag\n"));
        let back = read_trace_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
    }
}
