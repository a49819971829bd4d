use proptest::prelude::*;

use rapdb::diagnostics::{kkt_residual, slater_radius, smoothed_gap};
use rapdb::engine::{run, ApdbConfig};
use rapdb::generate::{analytic_suite, random_qcqp};
use rapdb::geometry::{project_dual, project_simplex, Cone, DualBall, DualDomain, SimpleSet};
use rapdb::linalg::{dist, dot, norm, sub};
use rapdb::problem::{Iterate, Mode, ProblemFile};

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-20.0f64..20.0, n)
}

fn sets(n: usize) -> Vec<SimpleSet> {
    vec![
        SimpleSet::cube(n, 1.5),
        SimpleSet::Ball {
            center: (0..n).map(|i| i as f64 * 0.1).collect(),
            radius: 2.0,
        },
        SimpleSet::Simplex { scale: 1.0 },
        SimpleSet::NonnegWithLinearEq {
            direction: (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect(),
        },
    ]
}

fn cones(m: usize) -> Vec<Cone> {
    vec![
        Cone::NonnegOrthant { dim: m },
        Cone::SecondOrderCone { dim: m },
        Cone::Product {
            parts: vec![Cone::NonnegOrthant { dim: 1 }, Cone::SecondOrderCone { dim: m - 1 }],
        },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn set_projection_is_idempotent_and_nonexpansive(a in vec_strategy(4), b in vec_strategy(4)) {
        for set in sets(4) {
            let pa = set.project(&a);
            let pb = set.project(&b);
            prop_assert!(set.contains(&pa, 1e-9), "{set:?}");
            prop_assert!(dist(&set.project(&pa), &pa) <= 1e-9 * (1.0 + norm(&pa)));
            prop_assert!(dist(&pa, &pb) <= dist(&a, &b) * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn set_projection_variational_inequality(w in vec_strategy(4), u in vec_strategy(4)) {
        // <w - P(w), u' - P(w)> <= 0 for every u' in the set.
        for set in sets(4) {
            let p = set.project(&w);
            let up = set.project(&u);
            let lhs = dot(&sub(&w, &p), &sub(&up, &p));
            prop_assert!(lhs <= 1e-8 * (1.0 + norm(&w) * norm(&u)), "{set:?}: {lhs}");
        }
    }

    #[test]
    fn cone_moreau_decomposition(w in vec_strategy(5)) {
        for cone in cones(5) {
            let p = cone.project(&w);
            let q = cone.project_neg(&w);
            let sum: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a + b).collect();
            prop_assert!(dist(&sum, &w) <= 1e-10 * (1.0 + norm(&w)));
            prop_assert!(dot(&p, &q).abs() <= 1e-10 * (1.0 + norm(&w).powi(2)));
            prop_assert!(cone.contains(&p, 1e-10));
        }
    }

    #[test]
    fn simplex_projection_sums_to_scale(w in vec_strategy(6), scale in 0.1f64..5.0) {
        let p = project_simplex(&w, scale);
        prop_assert!((p.iter().sum::<f64>() - scale).abs() <= 1e-10 * scale);
        prop_assert!(p.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn dual_projection_respects_ball(v in vec_strategy(2), lam in vec_strategy(3), r in 0.1f64..10.0) {
        for ball in [DualBall::JointBall { radius: r }, DualBall::SplitBall { radius_v: r, radius_lambda: 0.5 * r }] {
            for cone in cones(3) {
                let (mut pv, mut pl) = (v.clone(), lam.clone());
                project_dual(&cone, DualDomain::Cone, &ball, &mut pv, &mut pl);
                prop_assert!(ball.contains(&pv, &pl, 1e-12));
                prop_assert!(cone.contains(&pl, 1e-10));
                let (mut qv, mut ql) = (pv.clone(), pl.clone());
                project_dual(&cone, DualDomain::Cone, &ball, &mut qv, &mut ql);
                prop_assert!(dist(&qv, &pv) + dist(&ql, &pl) <= 1e-12 * (1.0 + norm(&pl)));
            }
        }
    }

    #[test]
    fn coupling_is_convex_in_x_and_affine_in_y(seed in 0u64..1000, t in 0.0f64..1.0) {
        let inst = random_qcqp(4, 2, seed).unwrap();
        let x1: Vec<f64> = (0..4).map(|i| (seed as f64 * 0.37 + i as f64).sin() * 5.0).collect();
        let x2: Vec<f64> = (0..4).map(|i| (seed as f64 * 0.11 - i as f64).cos() * 5.0).collect();
        let l1 = vec![0.3, 1.7];
        let l2 = vec![2.0, 0.1];
        let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| t * p + (1.0 - t) * q).collect::<Vec<f64>>();
        let phi = |x: &[f64], l: &[f64]| inst.coupling_value(&Iterate::new(x.to_vec(), vec![], l.to_vec())).unwrap();
        let xm = mix(&x1, &x2);
        let lhs = phi(&xm, &l1);
        let rhs = t * phi(&x1, &l1) + (1.0 - t) * phi(&x2, &l1);
        prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs.abs()));
        let lm = mix(&l1, &l2);
        let aff = t * phi(&x1, &l1) + (1.0 - t) * phi(&x1, &l2);
        prop_assert!((phi(&x1, &lm) - aff).abs() <= 1e-9 * (1.0 + aff.abs()));
    }

    #[test]
    fn smoothed_gap_is_nonnegative(seed in 0u64..50, lam0 in 0.0f64..3.0, x0 in -1.0f64..1.0) {
        let inst = random_qcqp(3, 2, seed).unwrap();
        let z = Iterate::new(vec![x0, -0.5 * x0, 2.0 * x0], vec![], vec![lam0, 0.5 * lam0]);
        let g = smoothed_gap(&inst, &z, 0.04, &DualBall::Unbounded, 1e-11).unwrap();
        prop_assert!(g.value >= -1e-9 - g.slack, "{}", g.value);
    }

    #[test]
    fn slater_radius_lower_bounds_samples(g0 in -5.0f64..-1.0, g1 in -0.5f64..0.5, g2 in -0.5f64..0.5) {
        let cone = Cone::SecondOrderCone { dim: 3 };
        let g = vec![g0, g1, g2];
        if let Ok(r) = slater_radius(&cone, &g) {
            for k in 0..64 {
                let a = k as f64 * std::f64::consts::TAU / 64.0;
                let w = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2 * a.cos(), std::f64::consts::FRAC_1_SQRT_2 * a.sin()];
                prop_assert!(-dot(&w, &g) >= r - 1e-12);
            }
        }
    }
}

#[test]
fn problem_json_round_trip() {
    for inst in [random_qcqp(6, 3, 11).unwrap(), analytic_suite()[2].instance.clone()] {
        let text = inst.to_json();
        let back = ProblemFile::from_json(&text).unwrap().into_instance().unwrap();
        assert_eq!(back.to_json(), text);
    }
}

#[test]
fn averages_stay_feasible() {
    let inst = random_qcqp(8, 3, 5).unwrap();
    for mode in [Mode::Xy, Mode::Yx] {
        let out = run(&inst, &ApdbConfig::defaults(mode), &Iterate::zeros(8, 0, 3), 200).unwrap();
        assert!(inst.primal_set().contains(&out.average.x, 1e-12));
        assert!(out.average.lam.iter().all(|l| *l >= 0.0));
    }
}

#[test]
fn analytic_oracles_have_small_kkt() {
    for case in analytic_suite() {
        let m = kkt_residual(&case.instance, &case.solution).unwrap();
        assert!(m.kkt_residual <= 1e-9, "{}: {}", case.name, m.kkt_residual);
    }
}
