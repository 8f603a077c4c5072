use std::sync::Arc;

use proptest::prelude::*;
use volmaj_core::{
    corpus, graded_mesh, majorant_branch, solve_main, solve_majorant, solve_tangency, BGrid, Checker, Classification,
    Condition, ConditionStatus, InverseMethod, KernelStage, LinearOperator, LyapunovSpec, MajorantOptions,
    MajorantSpec, Mesh, OuterMap, Sampler, Scaled, SecondDifference, SolveOptions, SolveStatus, VolterraProblem,
};

fn mesh(t_end: f64, n: usize) -> Arc<Mesh> {
    Arc::new(graded_mesh(t_end, n, 1.0).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // z' = a z, z(0) = b
    #[test]
    fn linear_majorant_is_exponential(a in 0.2f64..2.0, b in 0.1f64..2.0) {
        let spec = MajorantSpec::parse(&format!("w + {b}"), &format!("{a} * z")).unwrap();
        let sol = solve_majorant(&spec, mesh(1.0, 200), MajorantOptions::default()).unwrap();
        prop_assert_eq!(sol.classification(), Classification::Global);
        for (j, &t) in sol.mesh.nodes().iter().enumerate() {
            let exact = b * (a * t).exp();
            prop_assert!(rel(sol.z_plus[j], exact) < 1e-7, "t = {}: {} vs {}", t, sol.z_plus[j], exact);
            prop_assert!(rel(sol.chain.last()[j], exact) < 1e-3);
        }
        sol.check_invariants().unwrap();
    }

    // z' = a z^2, z(0) = b: z = b / (1 - a b t), horizon 1 / (a b)
    #[test]
    fn quadratic_majorant_blows_up_at_the_pole_of_its_solution(a in 0.3f64..2.0, b in 0.3f64..2.0) {
        let spec = MajorantSpec::parse(&format!("w + {b}"), &format!("{a} * z^2")).unwrap();
        let horizon = 1.0 / (a * b);
        let sol = solve_majorant(&spec, mesh(0.9 * horizon, 100), MajorantOptions::default()).unwrap();
        prop_assert_eq!(sol.classification(), Classification::ValueBlowUp);
        prop_assert!(rel(sol.horizon(), horizon) < 1e-7, "{} vs {}", sol.horizon(), horizon);
        for (j, &t) in sol.mesh.nodes().iter().enumerate() {
            prop_assert!(rel(sol.z_plus[j], b / (1.0 - a * b * t)) < 1e-7);
        }
    }

    #[test]
    fn majorant_chains_are_monotone(a in 0.2f64..1.5, b in 0.0f64..2.0, k in 0.0f64..2.0) {
        let spec = MajorantSpec::parse(&format!("w + {b} + {k}*t"), &format!("{a} * z + z^2")).unwrap();
        let sol = solve_majorant(&spec, mesh(0.3, 30), MajorantOptions::default()).unwrap();
        let chain = &sol.chain;
        for n in 1..chain.iterates.len() {
            let (prev, cur) = (&chain.iterates[n - 1], &chain.iterates[n]);
            for j in 0..cur.len() {
                prop_assert!(cur[j] >= prev[j] - 1e-12, "iterate {} node {}", n, j);
                if j > 0 {
                    prop_assert!(cur[j] >= cur[j - 1] - 1e-12, "iterate {} decreases in t at {}", n, j);
                }
            }
        }
    }

    // r = k t r^2 + t touches 1 = 2 k t r at t = 1 / (2 sqrt k), r = 1 / sqrt k
    #[test]
    fn lyapunov_tangency_and_branch(k in 0.25f64..4.0) {
        let spec = LyapunovSpec::parse(&format!("{k}*t*r^2 + t"), None, 1.0, 8.0, 4.0).unwrap();
        let tan = solve_tangency(&spec).unwrap();
        prop_assert!(rel(tan.r, 1.0 / k.sqrt()) < 1e-9);
        prop_assert!(rel(tan.t, 0.5 / k.sqrt()) < 1e-9);
        let nodes: Vec<f64> = (0..=20).map(|i| tan.t * i as f64 / 20.0).collect();
        let branch = majorant_branch(&spec, &tan, &nodes).unwrap();
        for (i, (&t, &r)) in branch.t.iter().zip(&branch.r).enumerate() {
            if i > 0 {
                prop_assert!(r >= branch.r[i - 1]);
            }
            prop_assert!(r <= tan.r * (1.0 + 1e-12));
            if t > 0.0 && i < 20 {
                let exact = (1.0 - (1.0 - 4.0 * k * t * t).sqrt()) / (2.0 * k * t);
                prop_assert!((r - exact).abs() < 1e-9 * (1.0 + exact), "t = {}: {} vs {}", t, r, exact);
            }
        }
    }

    #[test]
    fn green_and_tridiagonal_inverses_agree(m in 3usize..40, seed in any::<u64>()) {
        let rhs: Vec<f64> = (0..m).map(|i| ((seed.wrapping_mul(i as u64 + 1) % 1000) as f64 / 500.0) - 1.0).collect();
        let tri = SecondDifference::new(m, InverseMethod::Tridiagonal).unwrap();
        let green = SecondDifference::new(m, InverseMethod::Green).unwrap();
        let (mut a, mut b, mut back) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        tri.solve(&rhs, &mut a).unwrap();
        green.solve(&rhs, &mut b).unwrap();
        tri.apply(&a, &mut back);
        for i in 0..m {
            prop_assert!((a[i] - b[i]).abs() < 1e-12, "node {}: {} vs {}", i, a[i], b[i]);
            prop_assert!((back[i] - rhs[i]).abs() < 1e-9);
        }
    }

    // L(u) = 0 whatever u is, so A, D and E hold for any nonnegative majorant
    #[test]
    fn trivial_problem_passes_problem_conditions(
        a in 0.0f64..2.0, b in 0.0f64..2.0, c in 0.0f64..1.0, d in 0.0f64..2.0, seed in any::<u64>(),
    ) {
        let p = VolterraProblem::new(
            vec![KernelStage::scalar("0*u", 1).unwrap()],
            OuterMap::scalar("u + 0*w", 1).unwrap(),
            Arc::new(Scaled::identity(1)),
            1.0,
            10.0,
        )
        .unwrap();
        let spec = MajorantSpec::parse(&format!("{a}*w + {b}*t + {c}"), &format!("{d}*z + z^2")).unwrap();
        let grid = BGrid { t_max: 0.5, w_max: 1.0, z_max: 1.0, points: 20 };
        let checker = Checker::new(&spec, mesh(0.5, 10), grid)
            .with_problem(&p)
            .with_sampler(Sampler::new(seed, 2.0), 16);
        let report = checker.run();
        for cond in [Condition::A, Condition::D, Condition::E] {
            prop_assert_eq!(report.status(cond), Some(&ConditionStatus::Pass), "{}", cond.name());
        }
        prop_assert_eq!(report.status(Condition::B), Some(&ConditionStatus::Pass));
        prop_assert_eq!(&report, &checker.run());
    }
}

#[test]
fn witnesses_replay_and_are_sorted() {
    let p = VolterraProblem::new(
        vec![KernelStage::scalar("3*u^2 + 1", 1).unwrap()],
        OuterMap::scalar("w - u + t", 1).unwrap(),
        Arc::new(Scaled::identity(1)),
        1.0,
        10.0,
    )
    .unwrap();
    let spec = MajorantSpec::parse("w + t", "z^2").unwrap();
    let grid = BGrid { t_max: 0.5, w_max: 1.0, z_max: 1.0, points: 20 };
    let checker = Checker::new(&spec, mesh(0.5, 10), grid).with_problem(&p).with_sampler(Sampler::new(9, 1.0), 12);
    let report = checker.run();
    assert!(report.any_failed());
    assert!(!report.violations.is_empty());
    for w in report.violations.iter().take(20) {
        assert!(checker.replay(w).unwrap(), "{w}");
    }
    let conds: Vec<Condition> = report.violations.iter().map(|w| w.condition).collect();
    assert!(conds.windows(2).all(|c| c[0] <= c[1]));
}

fn linear_test_error(n: usize) -> f64 {
    let e = corpus::linear_test().unwrap();
    let m = mesh(1.0, n);
    let r = solve_main(e.problem.as_ref().unwrap(), m.clone(), SolveOptions::default(), None).unwrap();
    assert_eq!(r.status, SolveStatus::Converged);
    m.nodes()
        .iter()
        .enumerate()
        .map(|(j, &t)| (r.trajectory.value(j)[0] - (t.exp() - 1.0)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn trapezoid_solution_converges_at_second_order() {
    let errs: Vec<f64> = [20, 40, 80, 160].iter().map(|&n| linear_test_error(n)).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "observed order {order} from {errs:?}");
    }
}

#[test]
fn main_solution_is_deterministic_across_thread_counts() {
    let e = corpus::example2(9).unwrap();
    let p = e.problem.as_ref().unwrap();
    let m = mesh(0.4, 40);
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let wide = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = serial.install(|| solve_main(p, m.clone(), SolveOptions::default(), None).unwrap());
    let b = wide.install(|| solve_main(p, m.clone(), SolveOptions::default(), None).unwrap());
    assert_eq!(a.trajectory, b.trajectory);
    assert_eq!(a.iterations, b.iterations);
}
