//! Successive approximations `u_n = L(u_{n−1})` for the main solution.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integral_majorant::MajorantSolution;
use crate::problem::{eval_f_all, eval_l, max_abs, Mesh, Trajectory, VolterraProblem};
use crate::quadrature::{trapezoid_weights, WeightTable};

/// Slack for domination checks against a majorant chain.
pub const DOMINATION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub n_max: usize,
    /// Iterates kept in full before the stored chain is thinned.
    pub chain_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            n_max: 200,
            chain_cap: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    NotConverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub trajectory: Trajectory,
    pub iterations: usize,
    /// Per-node `‖F(u, t_j)‖` of the final trajectory.
    pub residual: Vec<f64>,
    /// Per-node `z⁺ − z_n`, bounding `‖u⁺ − u_n‖`, when a majorant was given.
    pub certified_bound: Option<Vec<f64>>,
    pub status: SolveStatus,
    /// False for runs started from a nonzero trajectory.
    pub main: bool,
    /// Max-node size of the final step.
    pub last_step: f64,
    /// The step criterion `step < tol·(1 + ‖u‖)` held at the end.
    pub step_criterion: bool,
    /// The tail criterion `z⁺ − z_n < tol` at the end node, when checked.
    pub tail_criterion: Option<bool>,
    /// Stored iterates `(n, u_n)`, thinned past the chain cap.
    pub chain: Vec<(usize, Trajectory)>,
}

impl SolveReport {
    pub fn max_residual(&self) -> f64 {
        max_abs(&self.residual)
    }
}

/// Per-node `‖F(u, t_j)‖` with trapezoid weights on the trajectory's mesh.
pub fn residual(p: &VolterraProblem, tr: &Trajectory) -> Result<Vec<f64>> {
    let weights = trapezoid_weights(tr.mesh());
    residual_with(p, tr, &weights)
}

fn residual_with(p: &VolterraProblem, tr: &Trajectory, weights: &WeightTable) -> Result<Vec<f64>> {
    Ok(eval_f_all(p, tr, weights)?.iter().map(|f| max_abs(f)).collect())
}

fn same_mesh(a: &Mesh, b: &Mesh) -> bool {
    a.nodes() == b.nodes()
}

/// The main solution: iterates from `u_0 = 0`.
pub fn solve_main(
    p: &VolterraProblem,
    mesh: Arc<Mesh>,
    opts: SolveOptions,
    majorant: Option<&MajorantSolution>,
) -> Result<SolveReport> {
    let start = Trajectory::zeros(mesh, p.dim());
    iterate(p, start, opts, majorant, true)
}

/// Iterates from a given trajectory; the result is labeled non-main.
pub fn solve_from(p: &VolterraProblem, initial: Trajectory, opts: SolveOptions) -> Result<SolveReport> {
    iterate(p, initial, opts, None, false)
}

fn thin(chain: &mut Vec<(usize, Trajectory)>, cap: usize) {
    if chain.len() <= cap {
        return;
    }
    // keep the first and last entries and every other one between
    let last = chain.len() - 1;
    let mut k = 0;
    chain.retain(|_| {
        let keep = k == 0 || k == last || k % 2 == 0;
        k += 1;
        keep
    });
}

fn iterate(
    p: &VolterraProblem,
    start: Trajectory,
    opts: SolveOptions,
    majorant: Option<&MajorantSolution>,
    main: bool,
) -> Result<SolveReport> {
    if !(opts.tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if start.dim() != p.dim() {
        return Err(Error::Precondition("initial trajectory has the wrong dimension".into()));
    }
    let mesh = start.mesh_arc().clone();
    if let Some(mz) = majorant {
        if !same_mesh(&mz.mesh, &mesh) {
            return Err(Error::Precondition("majorant and solve must share a mesh".into()));
        }
        if !(mesh.end() < mz.horizon()) {
            return Err(Error::Precondition(format!(
                "mesh end {} is not before the horizon {}",
                mesh.end(),
                mz.horizon()
            )));
        }
    }
    let weights = trapezoid_weights(&mesh);
    let end = mesh.len() - 1;
    let tail = |n: usize| -> Option<Vec<f64>> {
        majorant.map(|mz| {
            let lim = mz.z_limit();
            let zn = mz.chain.get(n);
            lim.iter().zip(zn).map(|(a, b)| (a - b).max(0.0)).collect()
        })
    };

    let mut u = start;
    let mut chain = vec![(0, u.clone())];
    let mut last_step = f64::INFINITY;
    let mut step_ok = false;
    let mut tail_ok = None;
    let mut n = 0;
    while n < opts.n_max {
        let next = eval_l(p, &u, &weights)?;
        n += 1;
        last_step = max_abs(&next.distance(&u));
        step_ok = last_step < opts.tol * (1.0 + next.max_norm());
        tail_ok = tail(n).map(|b| b[end] < opts.tol);
        u = next;
        chain.push((n, u.clone()));
        thin(&mut chain, opts.chain_cap);
        if step_ok || tail_ok == Some(true) {
            break;
        }
    }
    let status = if step_ok || tail_ok == Some(true) {
        SolveStatus::Converged
    } else {
        SolveStatus::NotConverged
    };
    let residual = residual_with(p, &u, &weights)?;
    let certified_bound = tail(n);
    if let Some(b) = &certified_bound {
        u = u.with_certified_bound(b.clone())?;
    }
    Ok(SolveReport {
        trajectory: u,
        iterations: n,
        residual,
        certified_bound,
        status,
        main,
        last_step,
        step_criterion: step_ok,
        tail_criterion: tail_ok,
        chain,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominationViolation {
    /// Iterate index, `None` for the limit pair.
    pub iterate: Option<usize>,
    pub node: usize,
    pub norm: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domination {
    pub holds: bool,
    pub first_violation: Option<DominationViolation>,
}

fn first_violation<'a>(
    pairs: impl Iterator<Item = (Option<usize>, &'a [f64], Vec<f64>)>,
) -> Option<DominationViolation> {
    for (iterate, norms, bound) in pairs {
        for (node, (a, b)) in norms.iter().zip(&bound).enumerate() {
            if *a > b + DOMINATION_SLACK {
                return Some(DominationViolation {
                    iterate,
                    node,
                    norm: *a,
                    bound: *b,
                });
            }
        }
    }
    None
}

fn check_mesh(report: &SolveReport, mz: &MajorantSolution) -> Result<()> {
    if !same_mesh(report.trajectory.mesh(), &mz.mesh) {
        return Err(Error::Precondition("solution and majorant must share a mesh".into()));
    }
    Ok(())
}

/// `‖u_n(t_j)‖ ≤ z_n(t_j)` for every stored iterate, and for the limits.
pub fn verify_domination(report: &SolveReport, mz: &MajorantSolution) -> Result<Domination> {
    check_mesh(report, mz)?;
    let stored = report
        .chain
        .iter()
        .map(|(n, tr)| (Some(*n), tr.norms(), mz.chain.get(*n).to_vec()));
    let limit = std::iter::once((None, report.trajectory.norms(), mz.z_limit().to_vec()));
    let v = first_violation(stored.chain(limit));
    Ok(Domination {
        holds: v.is_none(),
        first_violation: v,
    })
}

/// `‖u_{n+1} − u_n‖ ≤ z_{n+1} − z_n` over consecutive stored iterates.
pub fn verify_pair_domination(report: &SolveReport, mz: &MajorantSolution) -> Result<Domination> {
    check_mesh(report, mz)?;
    let mut pairs = Vec::new();
    for w in report.chain.windows(2) {
        let ((n0, a), (n1, b)) = (&w[0], &w[1]);
        if n1 - n0 != 1 {
            continue;
        }
        let diff = b.distance(a);
        let (z0, z1) = (mz.chain.get(*n0), mz.chain.get(*n1));
        let bound: Vec<f64> = z1.iter().zip(z0).map(|(x, y)| x - y).collect();
        pairs.push((*n1, diff, bound));
    }
    let v = first_violation(pairs.iter().map(|(n, d, b)| (Some(*n), d.as_slice(), b.clone())));
    Ok(Domination {
        holds: v.is_none(),
        first_violation: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integral_majorant::{solve_majorant, MajorantOptions, MajorantSpec};
    use crate::operators::Scaled;
    use crate::problem::{KernelStage, OuterMap};
    use crate::quadrature::graded_mesh;

    fn scalar(kernel: &str, outer: &str) -> VolterraProblem {
        VolterraProblem::new(
            vec![KernelStage::scalar(kernel, 1).unwrap()],
            OuterMap::scalar(outer, 1).unwrap(),
            Arc::new(Scaled::identity(1)),
            1.0,
            10.0,
        )
        .unwrap()
    }

    #[test]
    fn linear_test_converges_to_exponential() {
        let p = scalar("u", "u - w - t");
        let mesh = Arc::new(graded_mesh(1.0, 1000, 1.0).unwrap());
        let r = solve_main(&p, mesh, SolveOptions::default(), None).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert!(r.main);
        let u1 = r.trajectory.value(1000)[0];
        assert!((u1 - (std::f64::consts::E - 1.0)).abs() < 1e-4);
        assert!(r.max_residual() < 1e-9);
    }

    #[test]
    fn zero_problem_converges_immediately() {
        let p = scalar("u^2", "u - w");
        let mesh = Arc::new(graded_mesh(1.0, 10, 1.0).unwrap());
        let r = solve_main(&p, mesh, SolveOptions::default(), None).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.max_residual(), 0.0);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let p = scalar("u", "u - w - t");
        let mesh = Arc::new(graded_mesh(1.0, 50, 1.0).unwrap());
        let opts = SolveOptions {
            n_max: 2,
            ..SolveOptions::default()
        };
        let r = solve_main(&p, mesh, opts, None).unwrap();
        assert_eq!(r.status, SolveStatus::NotConverged);
        assert_eq!(r.iterations, 2);
    }

    #[test]
    fn nonzero_start_is_not_main() {
        let p = scalar("u", "u - w - t");
        let mesh = Arc::new(graded_mesh(1.0, 20, 1.0).unwrap());
        let start = Trajectory::from_fn(mesh, 1, |t, u| u[0] = t);
        let r = solve_from(&p, start, SolveOptions::default()).unwrap();
        assert!(!r.main);
    }

    #[test]
    fn chain_is_thinned() {
        let p = scalar("u", "u - w - t");
        let mesh = Arc::new(graded_mesh(1.0, 20, 1.0).unwrap());
        let opts = SolveOptions {
            chain_cap: 5,
            ..SolveOptions::default()
        };
        let r = solve_main(&p, mesh, opts, None).unwrap();
        assert!(r.chain.len() <= 5);
        assert_eq!(r.chain[0].0, 0);
        assert_eq!(r.chain.last().unwrap().0, r.iterations);
    }

    #[test]
    fn domination_against_linear_majorant() {
        // ‖L(u)‖ ≤ ∫‖u‖ + t: f = ω + t, γ = z
        let p = scalar("u", "u - w - t");
        let mesh = Arc::new(graded_mesh(1.0, 200, 1.0).unwrap());
        let spec = MajorantSpec::parse("w + t", "z").unwrap();
        let mz = solve_majorant(&spec, mesh.clone(), MajorantOptions::default()).unwrap();
        let r = solve_main(&p, mesh, SolveOptions::default(), Some(&mz)).unwrap();
        assert!(verify_domination(&r, &mz).unwrap().holds);
        assert!(verify_pair_domination(&r, &mz).unwrap().holds);
        assert!(r.certified_bound.as_ref().unwrap().iter().all(|&b| b >= 0.0));

        let zero = MajorantSpec::parse("0*w", "0*z").unwrap();
        let mz0 = solve_majorant(&zero, r.trajectory.mesh_arc().clone(), MajorantOptions::default()).unwrap();
        let d = verify_domination(&r, &mz0).unwrap();
        assert!(!d.holds);
        assert_eq!(d.first_violation.unwrap().node, 1);
    }
}
