//! Acceptance checks: one PASS/FAIL line per criterion with the measured values.

use std::time::Instant;

use rapdb::diagnostics::{
    dual_bound, kkt_residual, lagrangian_gap, slater_radius, smoothed_gap, Criterion, Termination,
};
use rapdb::engine::{run, Apdb, ApdbConfig};
use rapdb::experiment::{bench_random_qcqp, reference_solution, BenchOptions, SolverSpec};
use rapdb::generate::{analytic_suite, bundled_dataset, kml_instance, random_qcqp};
use rapdb::geometry::{project_simplex, Cone, DualBall};
use rapdb::linalg::{dist, dot, norm};
use rapdb::problem::{Iterate, Mode, ProblemInstance};
use rapdb::restart::{run_restarted, RestartPoint, RestartPolicy, RunOptions};
use rapdb::rng::CounterRng;

type Check = fn() -> Result<String, String>;

const GOLDEN: f64 = 1.618_033_988_749_895;
const ETA: f64 = 0.7;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn log_eta(x: f64) -> f64 {
    x.ln() / (1.0 / ETA).ln()
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn zeros(inst: &ProblemInstance) -> Iterate {
    Iterate::zeros(inst.n(), inst.p(), inst.m())
}

fn threads() -> usize {
    std::env::var("RAPDB_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn analytic_convergence() -> Result<String, String> {
    let mut details = Vec::new();
    for case in analytic_suite().into_iter().take(3) {
        let inst = &case.instance;
        let start = Instant::now();
        let opts = RunOptions {
            budget: 5_000,
            termination: Some(Termination {
                criterion: Criterion::Conic,
                eps: 1e-9,
                eps_feas: 1e-9,
                f_star: None,
            }),
            monitor_every: 1,
            warm_tau: false,
        };
        let out = run_restarted(
            inst,
            &ApdbConfig::defaults(Mode::Yx).with_nonmonotone(true),
            &RestartPolicy::fixed_default(Mode::Yx, true),
            &zeros(inst),
            &opts,
        )
        .map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        let dx = dist(&out.solution.x, &case.solution.x);
        let kkt = kkt_residual(inst, &out.solution).map_err(|e| e.to_string())?.kkt_residual;
        ensure(dx <= 1e-6 && kkt <= 1e-6 && secs < 5.0, || {
            format!("{}: |x - x*| = {dx:.2e}, kkt = {kkt:.2e}, {secs:.2}s", case.name)
        })?;
        details.push(format!("{} {} it |x-x*|={dx:.1e} kkt={kkt:.1e}", case.name, out.iterations));
    }
    Ok(details.join("; "))
}

struct CountRun {
    mode: Mode,
    nonmonotone: bool,
    k: usize,
    evals: u64,
    taus: Vec<f64>,
    total_weight: f64,
}

fn counting_runs() -> Result<Vec<CountRun>, String> {
    let mut runs = Vec::new();
    for seed in 0..10 {
        let inst = random_qcqp(50, 5, seed).map_err(|e| e.to_string())?;
        for mode in [Mode::Xy, Mode::Yx] {
            for nonmonotone in [false, true] {
                for k in [100, 1000] {
                    let cfg = ApdbConfig::defaults(mode).with_nonmonotone(nonmonotone);
                    let out = run(&inst, &cfg, &zeros(&inst), k).map_err(|e| e.to_string())?;
                    // The counter equals the sum of (1 + halvings) and each accepted
                    // tau is the trial shrunk by eta that many times.
                    for s in &out.steps {
                        let mut t = s.tau_trial;
                        for _ in 1..s.evals {
                            t *= cfg.eta;
                        }
                        ensure(t == s.tau, || format!("seed {seed}: tau ledger mismatch"))?;
                    }
                    let sum: u64 = out.steps.iter().map(|s| s.evals).sum();
                    ensure(sum == out.evals, || format!("seed {seed}: counter {} != {}", out.evals, sum))?;
                    runs.push(CountRun {
                        mode,
                        nonmonotone,
                        k,
                        evals: out.evals,
                        taus: out.steps.iter().map(|s| s.tau).collect(),
                        total_weight: out.total_weight,
                    });
                }
            }
        }
    }
    Ok(runs)
}

fn backtracking_bound() -> Result<String, String> {
    let runs = counting_runs()?;
    let mut worst: f64 = f64::NEG_INFINITY;
    for r in &runs {
        let tau_min = r.taus.iter().copied().fold(f64::INFINITY, f64::min);
        let per_iter = if r.nonmonotone { 1.0 + log_eta(GOLDEN) } else { 1.0 };
        // 1e-9 only absorbs rounding in the logarithms.
        let bound = per_iter * r.k as f64 + log_eta(1.0 / tau_min) + 1e-9;
        ensure(r.evals as f64 <= bound, || {
            format!(
                "{} nm={} K={}: evals {} > bound {bound:.3}",
                r.mode, r.nonmonotone, r.k, r.evals
            )
        })?;
        worst = worst.max(r.evals as f64 / bound);
    }
    Ok(format!("{} runs, max evals/bound = {worst:.4}", runs.len()))
}

fn stepsize_laws() -> Result<String, String> {
    let runs = counting_runs()?;
    let mut max_ratio: f64 = 0.0;
    for r in &runs {
        for w in r.taus.windows(2) {
            let ratio = w[1] / w[0];
            if r.nonmonotone {
                max_ratio = max_ratio.max(ratio);
                ensure(ratio <= GOLDEN + 1e-12, || format!("{}: tau ratio {ratio}", r.mode))?;
            } else {
                ensure(w[1] <= w[0], || format!("{}: monotone tau increased {} -> {}", r.mode, w[0], w[1]))?;
            }
        }
        if !r.nonmonotone {
            let tau_min = r.taus.iter().copied().fold(f64::INFINITY, f64::min);
            let k = r.k as f64;
            ensure(r.total_weight >= k * tau_min && r.total_weight <= k, || {
                format!("{}: T_K = {} outside [{}, {k}]", r.mode, r.total_weight, k * tau_min)
            })?;
        }
    }
    Ok(format!("{} runs, max non-monotone tau ratio = {max_ratio:.4}", runs.len()))
}

fn ergodic_rate() -> Result<String, String> {
    let checkpoints = [100usize, 200, 500, 1000, 2000, 5000, 10_000];
    let mut slopes = Vec::new();
    for seed in 0..3 {
        let inst = random_qcqp(50, 5, seed).map_err(|e| e.to_string())?;
        let reference = reference_solution(&inst).map_err(|e| e.to_string())?;
        ensure(reference.converged, || format!("seed {seed}: reference did not converge"))?;
        let mut solver = Apdb::new(&inst, ApdbConfig::defaults(Mode::Yx), &zeros(&inst)).map_err(|e| e.to_string())?;
        let mut pts = Vec::new();
        for k in 1..=*checkpoints.last().unwrap() {
            solver.step().map_err(|e| e.to_string())?;
            if checkpoints.contains(&k) {
                let gap = lagrangian_gap(&inst, &solver.average(), &reference.solution);
                ensure(gap > 0.0, || format!("seed {seed}: non-positive gap {gap:e} at K = {k}"))?;
                pts.push((k as f64, gap));
            }
        }
        let s = loglog_slope(&pts);
        ensure(s <= -0.9, || format!("seed {seed}: gap slope {s:.3} ({pts:?})"))?;
        slopes.push(s);
    }

    let case = &analytic_suite()[3];
    let inst = &case.instance;
    let mut solver = Apdb::new(inst, ApdbConfig::defaults(Mode::Yx), &zeros(inst)).map_err(|e| e.to_string())?;
    let ks = [8usize, 16, 32, 64, 128, 256, 512, 1024];
    let mut weights = vec![0.0; 1025];
    let mut dists = Vec::new();
    for k in 1..=1024 {
        solver.step().map_err(|e| e.to_string())?;
        weights[k] = solver.averages().total_weight;
        if ks.contains(&k) {
            dists.push((k as f64, solver.average().dist(&case.solution)));
        }
    }
    let s_mu = loglog_slope(&dists);
    ensure(s_mu <= -0.9, || format!("mu = 1: distance slope {s_mu:.3} ({dists:?})"))?;
    let mut min_growth = f64::INFINITY;
    for k in (64..=1024).step_by(2) {
        min_growth = min_growth.min(weights[k] / weights[k / 2]);
    }
    ensure(min_growth >= 2.5, || format!("mu = 1: min T_K / T_(K/2) = {min_growth:.3}"))?;
    Ok(format!(
        "gap slopes {:?}; mu=1 distance slope {s_mu:.2}, min T_K/T_K/2 = {min_growth:.2}",
        slopes.iter().map(|s| format!("{s:.2}")).collect::<Vec<_>>()
    ))
}

fn restart_ordering() -> Result<String, String> {
    let names = ["rapdb-yx-nm", "apdb-yx-nm", "rapdb-yx", "apdb-yx", "egm"];
    let report = bench_random_qcqp(&BenchOptions {
        n: 100,
        m: 5,
        seeds: (0..5).collect(),
        solvers: names.iter().map(|s| s.parse::<SolverSpec>().unwrap()).collect(),
        eps: 1e-7,
        budget: 50_000,
        monitor_every: 1,
        threads: threads(),
    })
    .map_err(|e| e.to_string())?;
    let med = &report.median_iterations;
    let chain: Vec<f64> = names.iter().map(|n| med[*n]).collect();
    let detail = names
        .iter()
        .zip(&chain)
        .map(|(n, v)| format!("{n}={v}"))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(chain[0] <= chain[1] && chain[1] <= chain[2] && chain[2] <= chain[3], || {
        format!("ordering violated: {detail}")
    })?;
    ensure(chain[..4].iter().all(|v| *v < chain[4]), || format!("EGM not beaten: {detail}"))?;
    let unconverged = report.runs.iter().filter(|r| !r.converged && r.solver != "egm").count();
    ensure(unconverged == 0, || format!("{unconverged} APDB runs hit the budget: {detail}"))?;
    Ok(format!("medians {detail}"))
}

fn restart_contraction() -> Result<String, String> {
    let mut details = Vec::new();
    for case in analytic_suite() {
        let inst = &case.instance;
        let policy = RestartPolicy::Fixed {
            period: 10,
            point: RestartPoint::Last,
        };
        let out = run_restarted(
            inst,
            &ApdbConfig::defaults(Mode::Yx).with_nonmonotone(true),
            &policy,
            &zeros(inst),
            &RunOptions::fixed_iterations(2_000),
        )
        .map_err(|e| e.to_string())?;
        // Distances of restart points above round-off; an exact hit of z* counts as c = 0.
        let d: Vec<f64> = out
            .restart_log
            .iter()
            .map(|e| e.point.dist(&case.solution))
            .take_while(|d| *d > 1e-11)
            .collect();
        let c = if d.len() < out.restart_log.len() && d.len() < 6 {
            0.0
        } else {
            ensure(d.len() >= 6, || format!("{}: only {} restarts", case.name, d.len()))?;
            let w = &d[d.len() - 6..];
            (w[5] / w[0]).powf(1.0 / 5.0)
        };
        ensure(c < 0.95, || format!("{}: contraction {c:.4} over {d:?}", case.name))?;
        details.push(format!("{} c={c:.3}", case.name));
    }
    Ok(details.join(", "))
}

fn random_dual_point(rng: &mut CounterRng, inst: &ProblemInstance) -> Iterate {
    let x: Vec<f64> = {
        let w: Vec<f64> = (0..inst.n()).map(|_| rng.uniform_range(-12.0, 12.0)).collect();
        inst.primal_set().project(&w)
    };
    let v = rng.normal_vec(inst.p());
    let lam: Vec<f64> = (0..inst.m()).map(|_| rng.uniform_range(0.0, 4.0)).collect();
    let mut z = Iterate::new(x, v, lam);
    rapdb::geometry::project_dual(inst.cone(), inst.dual_domain(), &DualBall::Unbounded, &mut z.v, &mut z.lam);
    z
}

fn smoothed_gap_suite() -> Result<String, String> {
    let xi = 0.04;
    let mut instances: Vec<(String, ProblemInstance)> = analytic_suite()
        .into_iter()
        .map(|c| (c.name.to_string(), c.instance))
        .collect();
    instances.push(("random-qcqp".into(), random_qcqp(10, 3, 1).map_err(|e| e.to_string())?));
    instances.push((
        "kml".into(),
        kml_instance(&bundled_dataset().head(20), 1.0, None).map_err(|e| e.to_string())?,
    ));
    let mut rng = CounterRng::new(99);
    let mut min_gap = f64::INFINITY;
    let saddles: Vec<Iterate> = analytic_suite().into_iter().map(|c| c.solution).collect();
    for (idx, (name, inst)) in instances.iter().enumerate() {
        for k in 0..100 {
            // For analytic instances every other point is a small perturbation of z*.
            let z = match saddles.get(idx) {
                Some(zs) if k % 2 == 1 => {
                    let mut z = zs.clone();
                    z.x.iter_mut().for_each(|v| *v += 1e-3 * rng.normal());
                    z.lam.iter_mut().for_each(|v| *v = (*v + 1e-3 * rng.normal()).max(0.0));
                    z.v.iter_mut().for_each(|v| *v += 1e-3 * rng.normal());
                    z.x = inst.primal_set().project(&z.x);
                    z
                }
                _ => random_dual_point(&mut rng, inst),
            };
            let g = smoothed_gap(inst, &z, xi, &DualBall::Unbounded, 1e-11).map_err(|e| e.to_string())?;
            min_gap = min_gap.min(g.value);
            ensure(g.value >= -1e-9, || format!("{name}: G = {:e}", g.value))?;
        }
    }
    let mut max_star: f64 = 0.0;
    for case in analytic_suite() {
        let g = smoothed_gap(&case.instance, &case.solution, xi, &DualBall::Unbounded, 1e-11)
            .map_err(|e| e.to_string())?;
        max_star = max_star.max(g.value);
        ensure(g.value <= 1e-7, || format!("{}: G(z*) = {:e}", case.name, g.value))?;
    }

    let inst = random_qcqp(50, 5, 3).map_err(|e| e.to_string())?;
    let policy = RestartPolicy::Adaptive {
        xi,
        q: 0.5,
        warmup: 50,
        check_period: 50,
        point: RestartPoint::Last,
    };
    let out = run_restarted(
        &inst,
        &ApdbConfig::defaults(Mode::Yx).with_nonmonotone(true),
        &policy,
        &zeros(&inst),
        &RunOptions::fixed_iterations(1_500),
    )
    .map_err(|e| e.to_string())?;
    ensure(!out.restart_log.is_empty(), || "no adaptive restart was triggered".into())?;
    for e in &out.restart_log {
        let tight = |z: &Iterate| smoothed_gap(&inst, z, xi, &DualBall::Unbounded, 1e-11).map(|g| g.value);
        let g_new = tight(&e.point).map_err(|e| e.to_string())?;
        let g_ref = tight(e.reference.as_ref().expect("adaptive reference")).map_err(|e| e.to_string())?;
        ensure(g_new >= -1e-9 && g_new <= 0.5 * g_ref + 1e-9, || {
            format!("restart at {}: G(new) = {g_new:e}, G(ref) = {g_ref:e}", e.iter)
        })?;
    }
    Ok(format!(
        "{} points, min G = {min_gap:.2e}; max G(z*) = {max_star:.1e}; {} adaptive restarts re-verified",
        100 * instances.len(),
        out.restart_log.len()
    ))
}

/// Projection onto the second-order cone by bisection on the multiplier of
/// `||u_bar|| - u_0 <= 0`.
fn soc_oracle(w: &[f64]) -> Vec<f64> {
    let nb = norm(&w[1..]);
    let at = |mu: f64| -> (f64, f64) { (w[0] + mu, (nb - mu).max(0.0)) };
    if nb <= w[0] {
        return w.to_vec();
    }
    let (mut lo, mut hi) = (0.0, nb + w[0].abs() + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (t, s) = at(mid);
        if s > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (t, s) = at(0.5 * (lo + hi));
    let mut out = vec![t.max(0.0)];
    out.extend(w[1..].iter().map(|v| if nb > 0.0 { v * s / nb } else { 0.0 }));
    if t <= 0.0 {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
    out
}

/// Simplex projection by bisection on the threshold.
fn simplex_oracle(w: &[f64], scale: f64) -> Vec<f64> {
    let mass = |th: f64| w.iter().map(|v| (v - th).max(0.0)).sum::<f64>();
    let wmax = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let wmin = w.iter().copied().fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (wmin - scale, wmax);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > scale {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let th = 0.5 * (lo + hi);
    w.iter().map(|v| (v - th).max(0.0)).collect()
}

fn geometry_oracles() -> Result<String, String> {
    let mut rng = CounterRng::new(2024);
    let (mut e_soc, mut e_simplex, mut e_moreau) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..1000 {
        let d = 2 + i % 6;
        let s = if i % 3 == 0 { 10.0 } else { 1.0 };
        let w: Vec<f64> = rng.normal_vec(d).into_iter().map(|v| v * s).collect();
        let cone = Cone::SecondOrderCone { dim: d };
        let p = cone.project(&w);
        e_soc = e_soc.max(dist(&p, &soc_oracle(&w)) / (1.0 + norm(&w)));
        let q = cone.project_neg(&w);
        let resid: Vec<f64> = w.iter().zip(p.iter().zip(&q)).map(|(a, (b, c))| a - b - c).collect();
        e_moreau = e_moreau.max(norm(&resid).max(dot(&p, &q).abs()) / (1.0 + norm(&w).powi(2)));
        let scale = 0.5 + rng.uniform() * 3.0;
        e_simplex = e_simplex.max(dist(&project_simplex(&w, scale), &simplex_oracle(&w, scale)));
    }
    ensure(e_soc <= 1e-8, || format!("SOC error {e_soc:e}"))?;
    ensure(e_simplex <= 1e-8, || format!("simplex error {e_simplex:e}"))?;
    ensure(e_moreau <= 1e-10, || format!("Moreau residual {e_moreau:e}"))?;

    let cones = [
        Cone::NonnegOrthant { dim: 4 },
        Cone::SecondOrderCone { dim: 3 },
        Cone::Product {
            parts: vec![Cone::NonnegOrthant { dim: 2 }, Cone::SecondOrderCone { dim: 3 }],
        },
    ];
    let mut worst_gap: f64 = 0.0;
    for cone in &cones {
        let m = cone.dim();
        for _ in 0..5 {
            // A strictly feasible value: -g in the interior of K.
            let mut neg_g = cone.project(&rng.normal_vec(m));
            cone.for_each_block(|b, off| match b {
                Cone::SecondOrderCone { .. } => neg_g[off] += 0.5 + rng.uniform(),
                _ => (off..off + b.dim()).for_each(|i| neg_g[i] += 0.2 + rng.uniform()),
            });
            let g: Vec<f64> = neg_g.iter().map(|v| -v).collect();
            let r = slater_radius(cone, &g).map_err(|e| e.to_string())?;
            let mut brute = f64::INFINITY;
            for _ in 0..100_000 {
                let w = cone.project(&rng.normal_vec(m));
                let nw = norm(&w);
                if nw > 0.0 {
                    brute = brute.min(-dot(&w, &g) / nw);
                }
            }
            ensure(r <= brute + 1e-12, || format!("{cone:?}: r* = {r} above sampled minimum {brute}"))?;
            ensure(brute - r <= 1e-2, || format!("{cone:?}: r* = {r}, sampled minimum {brute}"))?;
            worst_gap = worst_gap.max(brute - r);
        }
    }
    Ok(format!(
        "SOC err {e_soc:.1e}, simplex err {e_simplex:.1e}, Moreau {e_moreau:.1e}, slater sample gap <= {worst_gap:.1e}"
    ))
}

fn gradient_checks() -> Result<String, String> {
    let mut rng = CounterRng::new(7);
    let mut pool: Vec<ProblemInstance> = analytic_suite().into_iter().map(|c| c.instance).collect();
    for seed in 0..6 {
        pool.push(random_qcqp(3 + seed as usize, 1 + seed as usize % 4, seed).map_err(|e| e.to_string())?);
    }
    pool.push(kml_instance(&bundled_dataset().head(12), 1.0, None).map_err(|e| e.to_string())?);
    let (mut worst_x, mut worst_y) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let inst = &pool[i % pool.len()];
        let z = random_dual_point(&mut rng, inst);
        let g = inst.grad_x_coupling(&z).map_err(|e| e.to_string())?;
        let phi = |x: &[f64]| inst.coupling_value(&Iterate::new(x.to_vec(), z.v.clone(), z.lam.clone())).unwrap();
        let mut fd = vec![0.0; inst.n()];
        for j in 0..inst.n() {
            let h = 1e-4 * (1.0 + z.x[j].abs());
            let (mut xp, mut xm) = (z.x.clone(), z.x.clone());
            xp[j] += h;
            xm[j] -= h;
            fd[j] = (phi(&xp) - phi(&xm)) / (2.0 * h);
        }
        let rel = dist(&fd, &g) / norm(&g).max(1.0);
        worst_x = worst_x.max(rel);
        ensure(rel <= 1e-6, || format!("instance {i}: grad_x relative error {rel:e}"))?;

        let (gv, gl) = inst.grad_y_coupling(&z).map_err(|e| e.to_string())?;
        let dv = rng.normal_vec(inst.p());
        let dl = rng.normal_vec(inst.m());
        let base = inst.coupling_value(&z).map_err(|e| e.to_string())?;
        let moved = Iterate::new(
            z.x.clone(),
            z.v.iter().zip(&dv).map(|(a, b)| a + b).collect(),
            z.lam.iter().zip(&dl).map(|(a, b)| a + b).collect(),
        );
        let after = inst.coupling_value(&moved).map_err(|e| e.to_string())?;
        let err = (after - base - dot(&gv, &dv) - dot(&gl, &dl)).abs() / base.abs().max(after.abs()).max(1.0);
        worst_y = worst_y.max(err);
        ensure(err <= 1e-12, || format!("instance {i}: grad_y affinity error {err:e}"))?;
    }
    Ok(format!("100 pairs, max grad_x rel err {worst_x:.1e}, max grad_y err {worst_y:.1e}"))
}

fn dual_bound_validity() -> Result<String, String> {
    let mut details = Vec::new();
    for case in analytic_suite() {
        let inst = &case.instance;
        // The origin is a Slater point except for the equality case, whose
        // feasible centre is the solution itself.
        let x_tilde = if inst.p() > 0 { case.solution.x.clone() } else { vec![0.0; inst.n()] };
        let b = dual_bound(inst, &x_tilde, &vec![0.0; inst.p()], &vec![0.0; inst.m()]).map_err(|e| e.to_string())?;
        let (lam, v) = (norm(&case.solution.lam), norm(&case.solution.v));
        ensure(b.b_lambda >= lam && b.b_v >= v, || {
            format!("{}: B_lam = {} vs {lam}, B_v = {} vs {v}", case.name, b.b_lambda, b.b_v)
        })?;
        details.push(format!("{} B_lam={:.3}>={lam:.3} B_v={:.3}>={v:.3}", case.name, b.b_lambda, b.b_v));
    }
    Ok(details.join("; "))
}

fn main() {
    let checks: [(&str, Check); 10] = [
        ("analytic-oracle convergence", analytic_convergence),
        ("backtracking-count bound", backtracking_bound),
        ("stepsize laws", stepsize_laws),
        ("ergodic rate", ergodic_rate),
        ("restart ordering", restart_ordering),
        ("linear convergence across restarts", restart_contraction),
        ("smoothed-gap suite", smoothed_gap_suite),
        ("geometry oracles", geometry_oracles),
        ("gradient checks", gradient_checks),
        ("dual-bound validity", dual_bound_validity),
    ];
    let filter = std::env::args().nth(1).filter(|a| !a.starts_with('-'));
    let total = Instant::now();
    let mut failed = 0;
    for (name, check) in checks {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {detail}");
            }
        }
    }
    println!("acceptance: {failed} failed, total {:.1}s", total.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
