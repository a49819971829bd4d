//! Command-line driver: instance generation, single solves, seed batches,
//! smoothed-gap evaluation and Slater dual bounds.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use rapdb::diagnostics::{dual_bound, smoothed_gap, Criterion, Termination};
use rapdb::experiment::{
    bench_random_qcqp_with, reference_solution, render_table, run_solver, write_trace_csv, BenchOptions,
    SolverOverrides, SolverSpec,
};
use rapdb::generate::{analytic_suite, bundled_dataset, kml_instance, random_qcqp, read_dataset_csv, synthetic_dataset};
use rapdb::problem::ProblemFile;
use rapdb::{ApdbConfig, DualBall, Iterate, ProblemInstance, RestartPolicy, RunOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Solver(#[from] rapdb::Error),
}

type CliResult<T> = Result<T, CliError>;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "rapdb", version, about = "Restarted accelerated primal-dual methods with backtracking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a problem instance as JSON.
    Gen(GenArgs),
    /// Solve one instance.
    Solve(SolveArgs),
    /// Run several solvers over a batch of random instances.
    Bench(BenchArgs),
    /// Evaluate the smoothed duality gap at a point.
    Gap(GapArgs),
    /// Compute Slater-based bounds on the dual solution.
    Bound(BoundArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    RandomQcqp,
    Kml,
    Analytic,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Variables (random-qcqp) or features of the synthetic dataset (kml).
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Quadratic constraints (random-qcqp).
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV with one sample per row and the label in the last column (kml).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Synthetic samples when no data file is given (kml); 0 uses the bundled dataset.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Kernel trace budget (kml); defaults to the sum of kernel traces.
    #[arg(long)]
    pub c: Option<f64>,
    /// Analytic case name.
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct RunFlags {
    /// Solver name, e.g. rapdb-yx, apdb-xy-nm, rapdb-yx-ada, egm, egm:0.05.
    #[arg(long)]
    pub solver: Option<String>,
    #[arg(long)]
    pub nonmonotone: bool,
    /// none | fixed:K[:last|average] | adaptive[:xi=..,q=..,warmup=..,check=..,point=..]
    #[arg(long)]
    pub restart: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub eps_feas: Option<f64>,
    #[arg(long, value_enum)]
    pub criterion: Option<CriterionArg>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub monitor_every: Option<usize>,
    /// EGM stepsize; omitted means tuned over the grid.
    #[arg(long)]
    pub stepsize: Option<f64>,
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Paper51,
    Conic,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Paper51 => Criterion::Paper51,
            CriterionArg::Conic => Criterion::Conic,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[command(flatten)]
    pub run: RunFlags,
    /// Known optimal value for the relative criterion.
    #[arg(long)]
    pub f_star: Option<f64>,
    /// Compute f* with a high-accuracy reference solve first.
    #[arg(long)]
    pub reference: bool,
    /// Starting point as JSON {x, v, lam}; zeros by default.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Trace CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub restart_log: Option<PathBuf>,
    /// Final iterate as JSON.
    #[arg(long)]
    pub solution: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "random-qcqp")]
    pub family: Family,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    /// Inclusive range A..B or a comma-separated list.
    #[arg(long, default_value = "0..4")]
    pub seeds: String,
    /// Comma-separated solver names.
    #[arg(long, default_value = "apdb-yx,rapdb-yx")]
    pub solvers: String,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub monitor_every: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Directory receiving one trace CSV per run.
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Point as JSON {x, v, lam}.
    #[arg(long)]
    pub point: PathBuf,
    #[arg(long, default_value_t = 0.04)]
    pub xi: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Slater point as a JSON array; the projection of 0 onto X by default.
    #[arg(long)]
    pub slater: Option<PathBuf>,
    /// Probe (v, lam) as JSON {v, lam}; zeros by default.
    #[arg(long)]
    pub probe: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Run configuration file. Every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub solver: Option<String>,
    pub nonmonotone: Option<bool>,
    pub restart: Option<RestartPolicy>,
    pub eps: Option<f64>,
    pub eps_feas: Option<f64>,
    pub criterion: Option<Criterion>,
    pub budget: Option<usize>,
    pub monitor_every: Option<usize>,
    pub stepsize: Option<f64>,
    pub warm_tau: Option<bool>,
    /// Partial solver parameters merged over the defaults of the chosen variant.
    pub apdb: Option<serde_json::Value>,
    pub dual_ball: Option<DualBall>,
}

#[derive(Debug, Deserialize)]
struct ProbeFile {
    #[serde(default)]
    v: Vec<f64>,
    #[serde(default)]
    lam: Vec<f64>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_command<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

pub fn execute(cmd: &Command) -> CliResult<i32> {
    match cmd {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gap(a) => cmd_gap(a),
        Command::Bound(a) => cmd_bound(a),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn parse_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| json_error(path, &e))
}

fn json_error(path: &Path, e: &serde_json::Error) -> CliError {
    input(format!("{}: {e}", path.display()))
}

pub fn load_problem(path: &Path) -> CliResult<ProblemInstance> {
    let file: ProblemFile = parse_json(path)?;
    file.into_instance()
        .map_err(|e| input(format!("{}: {e}", path.display())))
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    parse_json(path)
}

/// Writes via a temporary sibling and a rename so readers never see a
/// partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |e: std::io::Error| input(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen(a: &GenArgs) -> CliResult<i32> {
    let inst = match a.family {
        Family::RandomQcqp => random_qcqp(a.n, a.m, a.seed)?,
        Family::Kml => {
            let data = match (&a.data, a.samples) {
                (Some(path), _) => {
                    let f = fs::File::open(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
                    let mut d = read_dataset_csv(f).map_err(|e| input(format!("{}: {e}", path.display())))?;
                    d.standardize();
                    d
                }
                (None, 0) => bundled_dataset(),
                (None, s) => synthetic_dataset(s, a.n, a.seed),
            };
            kml_instance(&data, a.lambda, a.c)?
        }
        Family::Analytic => {
            let name = a.case.as_deref().ok_or_else(|| input("--case is required for the analytic family"))?;
            let suite = analytic_suite();
            let names: Vec<&str> = suite.iter().map(|c| c.name).collect();
            let case = suite
                .iter()
                .find(|c| c.name == name)
                .ok_or_else(|| input(format!("unknown analytic case '{name}'; expected one of {names:?}")))?;
            case.instance.clone()
        }
    };
    let mut text = inst.to_json();
    text.push('\n');
    emit(a.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

/// Solver, overrides and run options after merging flags, config and defaults.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub spec: SolverSpec,
    pub overrides: SolverOverrides,
    pub options: RunOptions,
}

pub fn resolve(flags: &RunFlags, f_star: Option<f64>) -> CliResult<Resolved> {
    let cfg = match &flags.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let where_cfg = |msg: String| match &flags.config {
        Some(p) => input(format!("{}: {msg}", p.display())),
        None => input(msg),
    };
    let name = flags.solver.clone().or(cfg.solver.clone()).unwrap_or_else(|| "rapdb-yx".into());
    let mut spec: SolverSpec = name.parse().map_err(|e: rapdb::Error| input(e.to_string()))?;
    let nonmonotone = flags.nonmonotone || cfg.nonmonotone.unwrap_or(false);
    if let SolverSpec::Apdb { nonmonotone: nm, .. } = &spec {
        let on = *nm || nonmonotone;
        spec = spec.with_nonmonotone(on);
    }
    if let SolverSpec::Egm { stepsize } = &mut spec {
        if let Some(s) = flags.stepsize.or(*stepsize).or(cfg.stepsize) {
            *stepsize = Some(s);
        }
    }
    let policy = match &flags.restart {
        Some(s) => Some(s.parse::<RestartPolicy>().map_err(|e| input(e.to_string()))?),
        None => cfg.restart.clone(),
    };
    if let Some(p) = &policy {
        p.validate().map_err(|e| where_cfg(e.to_string()))?;
        if matches!(spec, SolverSpec::Egm { .. }) && *p != RestartPolicy::None {
            return Err(input("EGM does not support restarts"));
        }
    }
    let config = match spec.default_config() {
        Some(mut base) => {
            if let Some(patch) = &cfg.apdb {
                base = merge_config(base, patch).map_err(where_cfg)?;
            }
            if let SolverSpec::Apdb { nonmonotone, .. } = spec {
                base.nonmonotone = nonmonotone;
            }
            if let Some(ball) = cfg.dual_ball {
                base.dual_ball = ball;
            }
            base.validate().map_err(|e| where_cfg(e.to_string()))?;
            Some(base)
        }
        None => cfg.dual_ball.map(|ball| ApdbConfig {
            dual_ball: ball,
            ..ApdbConfig::default()
        }),
    };
    let eps = flags.eps.or(cfg.eps).unwrap_or(1e-7);
    let termination = Termination {
        criterion: flags.criterion.map(Criterion::from).or(cfg.criterion).unwrap_or_default(),
        eps,
        eps_feas: flags.eps_feas.or(cfg.eps_feas).unwrap_or(eps),
        f_star,
    };
    if !(termination.eps > 0.0 && termination.eps_feas > 0.0) {
        return Err(input("tolerances must be positive"));
    }
    let defaults = RunOptions::default();
    let options = RunOptions {
        budget: flags.budget.or(cfg.budget).unwrap_or(defaults.budget),
        termination: Some(termination),
        monitor_every: flags.monitor_every.or(cfg.monitor_every).unwrap_or(defaults.monitor_every),
        warm_tau: cfg.warm_tau.unwrap_or(defaults.warm_tau),
    };
    if options.budget == 0 {
        return Err(input("budget must be at least 1"));
    }
    Ok(Resolved {
        spec,
        overrides: SolverOverrides { config, policy },
        options,
    })
}

fn merge_config(base: ApdbConfig, patch: &serde_json::Value) -> Result<ApdbConfig, String> {
    let serde_json::Value::Object(fields) = patch else {
        return Err("'apdb' must be an object".into());
    };
    let mut value = serde_json::to_value(&base).expect("config serializes");
    let target = value.as_object_mut().expect("config is an object");
    for (k, v) in fields {
        if !target.contains_key(k) {
            return Err(format!("unknown apdb field '{k}'"));
        }
        target.insert(k.clone(), v.clone());
    }
    serde_json::from_value(value).map_err(|e| format!("apdb: {e}"))
}

#[derive(Debug, Serialize)]
struct SolveSummary<'a> {
    problem: String,
    #[serde(flatten)]
    summary: &'a rapdb::experiment::RunSummary,
    f_star: Option<f64>,
}

fn cmd_solve(a: &SolveArgs) -> CliResult<i32> {
    let inst = load_problem(&a.problem)?;
    let mut f_star = a.f_star;
    if a.reference && f_star.is_none() {
        let r = reference_solution(&inst)?;
        if !r.converged {
            eprintln!("warning: reference solve stopped at kkt {:e}", r.kkt_residual);
        }
        f_star = Some(r.f_star);
    }
    let resolved = resolve(&a.run, f_star)?;
    let z0 = match &a.init {
        Some(p) => {
            let z: Iterate = parse_json(p)?;
            inst.check_iterate(&z).map_err(|e| input(format!("{}: {e}", p.display())))?;
            z
        }
        None => Iterate::zeros(inst.n(), inst.p(), inst.m()),
    };
    let result = run_solver(&inst, &resolved.spec, &z0, &resolved.options, &resolved.overrides)?;
    if let Some(p) = &a.out {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &result.trace)?;
        write_atomic(p, &buf)?;
    }
    if let Some(p) = &a.restart_log {
        write_atomic(p, to_json(&result.restart_log).as_bytes())?;
    }
    if let Some(p) = &a.solution {
        write_atomic(p, to_json(&result.solution).as_bytes())?;
    }
    let summary = SolveSummary {
        problem: a.problem.display().to_string(),
        summary: &result.summary,
        f_star,
    };
    let text = to_json(&summary);
    match &a.summary {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    let s = &result.summary;
    eprintln!(
        "{}: {} after {} iterations ({} evaluations), kkt {:.3e}",
        s.solver,
        if s.converged { "converged" } else { "not converged" },
        s.iterations,
        s.evals,
        s.metrics.kkt_residual
    );
    Ok(if s.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

/// Parses `A..B` (inclusive) or `a,b,c`.
pub fn parse_seeds(s: &str) -> CliResult<Vec<u64>> {
    let bad = |e: String| input(format!("--seeds '{s}': {e}"));
    if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let lo: u64 = lo.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        let hi: u64 = hi.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        if hi < lo {
            return Err(bad("empty range".into()));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string())))
        .collect::<CliResult<Vec<u64>>>()
        .and_then(|v| if v.is_empty() { Err(bad("no seeds".into())) } else { Ok(v) })
}

/// Worker count: `RAPDB_THREADS` if set, else the available parallelism.
pub fn bench_threads() -> CliResult<usize> {
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("RAPDB_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(input(format!("RAPDB_THREADS must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(avail),
    }
}

fn cmd_bench(a: &BenchArgs) -> CliResult<i32> {
    if a.family != Family::RandomQcqp {
        return Err(input("bench supports --family random-qcqp only"));
    }
    let cfg = match &a.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let solvers = a
        .solvers
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.parse::<SolverSpec>().map_err(|e| input(e.to_string())))
        .collect::<CliResult<Vec<_>>>()?;
    if solvers.is_empty() {
        return Err(input("--solvers is empty"));
    }
    let opts = BenchOptions {
        n: a.n,
        m: a.m,
        seeds: parse_seeds(&a.seeds)?,
        solvers,
        eps: a.eps.or(cfg.eps).unwrap_or(1e-7),
        budget: a.budget.or(cfg.budget).unwrap_or(50_000),
        monitor_every: a.monitor_every.or(cfg.monitor_every).unwrap_or(1),
        threads: bench_threads()?,
    };
    let trace_dir = a.trace_dir.clone();
    let sink = move |seed: u64, r: &rapdb::experiment::RunResult| -> rapdb::Result<()> {
        if let Some(dir) = &trace_dir {
            let mut buf = Vec::new();
            write_trace_csv(&mut buf, &r.trace)?;
            let path = dir.join(format!("{}_seed{seed}.csv", r.summary.solver));
            write_atomic(&path, &buf).map_err(|e| rapdb::Error::Data(e.to_string()))?;
        }
        Ok(())
    };
    let report = bench_random_qcqp_with(&opts, &sink)?;
    eprint!("{}", render_table(&report.table));
    for (solver, med) in &report.median_iterations {
        eprintln!("median iterations {solver}: {med}");
    }
    emit(a.summary.as_deref(), &to_json(&report))?;
    let all = report.runs.iter().all(|r| r.converged);
    Ok(if all { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn cmd_gap(a: &GapArgs) -> CliResult<i32> {
    let inst = load_problem(&a.problem)?;
    let z: Iterate = parse_json(&a.point)?;
    inst.check_iterate(&z).map_err(|e| input(format!("{}: {e}", a.point.display())))?;
    if !(a.xi > 0.0) {
        return Err(input(format!("--xi must be positive, got {}", a.xi)));
    }
    let g = smoothed_gap(&inst, &z, a.xi, &DualBall::Unbounded, a.tol)?;
    emit(a.out.as_deref(), &to_json(&g))?;
    Ok(EXIT_OK)
}

fn cmd_bound(a: &BoundArgs) -> CliResult<i32> {
    let inst = load_problem(&a.problem)?;
    let x_tilde = match &a.slater {
        Some(p) => parse_json::<Vec<f64>>(p)?,
        None => inst.primal_set().project(&vec![0.0; inst.n()]),
    };
    let (v, lam) = match &a.probe {
        Some(p) => {
            let f: ProbeFile = parse_json(p)?;
            (f.v, f.lam)
        }
        None => (vec![0.0; inst.p()], vec![0.0; inst.m()]),
    };
    let b = dual_bound(&inst, &x_tilde, &v, &lam)?;
    for w in &b.warnings {
        eprintln!("warning: {w}");
    }
    emit(a.out.as_deref(), &to_json(&b))?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_parse_as_inclusive_ranges_and_lists() {
        assert_eq!(parse_seeds("0..4").unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(parse_seeds("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(parse_seeds("7, 9").unwrap(), vec![7, 9]);
        assert!(parse_seeds("4..1").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn flags_override_defaults() {
        let flags = RunFlags {
            solver: Some("rapdb-yx".into()),
            nonmonotone: true,
            restart: Some("fixed:400".into()),
            eps: Some(1e-6),
            ..Default::default()
        };
        let r = resolve(&flags, None).unwrap();
        assert_eq!(r.spec.to_string(), "rapdb-yx-nm");
        assert_eq!(r.overrides.policy, Some("fixed:400".parse().unwrap()));
        assert!(r.overrides.config.unwrap().nonmonotone);
        assert_eq!(r.options.termination.unwrap().eps, 1e-6);
    }

    #[test]
    fn config_patch_is_merged_and_checked() {
        let base = ApdbConfig::defaults(rapdb::Mode::Yx);
        let merged = merge_config(base.clone(), &serde_json::json!({"eta": 0.5})).unwrap();
        assert_eq!(merged.eta, 0.5);
        assert_eq!(merged.c_alpha, base.c_alpha);
        assert!(merge_config(base, &serde_json::json!({"etta": 0.5})).is_err());
    }
}
