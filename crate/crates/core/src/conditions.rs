//! Sampled audits of the hypotheses behind the majorant theorems.
//!
//! A: `‖F(u, t) − Au‖ ≤ f(t, ∫γ(‖u‖))`.
//! B: `f` and `γ` nondecreasing.
//! C: the supplied upper solution `z′` satisfies `z′ ≥ f(t, ∫γ(z′))`.
//! D: `‖(F − A)(u + V) − (F − A)(u)‖ ≤ f(t, ∫γ(‖u‖ + ‖V‖)) − f(t, ∫γ(‖u‖))`.
//! E: `‖(F_u − A)V‖ ≤ f_ω(t, ∫γ(‖u‖)) · ∫γ′(‖u‖)‖V‖`.
//! G: the Lyapunov majorant is convex in `r` and monotone.
//!
//! Sampling can only falsify; a pass means no sampled counterexample.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebraic_majorant::{check_convexity, uniform_grid, LyapunovSpec};
use crate::error::{Error, Result};
use crate::integral_majorant::{check_upper_solution, MajorantSpec};
use crate::problem::{eval_f_all, max_abs, Mesh, Trajectory, VolterraProblem};
use crate::quadrature::{trapezoid_weights, WeightTable};
use crate::roots::central_difference;

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_SAMPLES: usize = 200;
/// Absolute slack for condition A.
pub const A_SLACK: f64 = 1e-9;
/// Slack for B's monotonicity steps.
pub const B_SLACK: f64 = 1e-12;
/// D and E compare finite differences, so they get a relative slack too.
pub const DE_ABS_SLACK: f64 = 1e-9;
pub const DE_REL_SLACK: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    A,
    B,
    C,
    D,
    E,
    G,
}

impl Condition {
    pub const ALL: [Condition; 6] = [Condition::A, Condition::B, Condition::C, Condition::D, Condition::E, Condition::G];

    pub fn name(self) -> &'static str {
        match self {
            Condition::A => "A",
            Condition::B => "B",
            Condition::C => "C",
            Condition::D => "D",
            Condition::E => "E",
            Condition::G => "G",
        }
    }
}

/// Where a violation was found.
#[derive(Debug, Clone, PartialEq)]
pub enum Location {
    /// Sampled trajectory `sample` at mesh node `node`.
    Sample { sample: usize, node: usize, t: f64 },
    /// A decreasing grid step of `function` between two argument points.
    Grid {
        function: &'static str,
        from: [f64; 2],
        to: [f64; 2],
    },
    /// Mesh node of the upper-solution check.
    Node { node: usize, t: f64 },
    /// Grid point of the convexity check.
    Point { r: f64, t: f64 },
}

/// A violated inequality `lhs ≤ rhs`, replayable through [`Checker::replay`].
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub condition: Condition,
    pub location: Location,
    pub lhs: f64,
    pub rhs: f64,
    pub detail: String,
}

impl Witness {
    fn sort_key(&self) -> (Condition, f64, usize) {
        match self.location {
            Location::Sample { sample, t, .. } => (self.condition, t, sample),
            Location::Grid { from, .. } => (self.condition, from[0], 0),
            Location::Node { t, .. } => (self.condition, t, 0),
            Location::Point { t, .. } => (self.condition, t, 0),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Location::Sample { sample, node, t } => write!(f, "sample {sample}, node {node}, t = {t}")?,
            Location::Grid { function, from, to } => {
                write!(f, "{function} decreases from ({}, {}) to ({}, {})", from[0], from[1], to[0], to[1])?
            }
            Location::Node { node, t } => write!(f, "node {node}, t = {t}")?,
            Location::Point { r, t } => write!(f, "r = {r}, t = {t}")?,
        }
        write!(f, ": {} > {}", self.lhs, self.rhs)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConditionStatus {
    Pass,
    Fail(Witness),
    Skipped(String),
}

impl ConditionStatus {
    pub fn label(&self) -> &'static str {
        match self {
            ConditionStatus::Pass => "pass (sampled, not proven)",
            ConditionStatus::Fail(_) => "fail",
            ConditionStatus::Skipped(_) => "skipped",
        }
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, ConditionStatus::Fail(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionEntry {
    pub condition: Condition,
    pub status: ConditionStatus,
    /// Inequalities evaluated.
    pub checks: usize,
    /// Smallest `rhs − lhs` seen; negative on failure.
    pub worst_margin: Option<f64>,
    pub note: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub entries: Vec<ConditionEntry>,
    /// All recorded violations, sorted by (condition, t, sample).
    pub violations: Vec<Witness>,
    pub seed: u64,
    pub samples: usize,
}

impl ConditionReport {
    pub fn status(&self, c: Condition) -> Option<&ConditionStatus> {
        self.entries.iter().find(|e| e.condition == c).map(|e| &e.status)
    }

    pub fn any_failed(&self) -> bool {
        self.entries.iter().any(|e| e.status.is_fail())
    }
}

/// Pseudo-random trajectories in the max-abs ball of radius `bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampler {
    pub seed: u64,
    pub bound: f64,
}

impl Sampler {
    pub fn new(seed: u64, bound: f64) -> Self {
        Self { seed, bound }
    }

    /// Trajectory number `id`: uniform draws per node and component,
    /// then one 1-2-1 averaging pass in time.
    pub fn trajectory(&self, mesh: Arc<Mesh>, dim: usize, id: usize) -> Trajectory {
        self.draw(mesh, dim, self.seed.wrapping_add(id as u64), self.bound)
    }

    /// Direction number `id`, drawn from a stream separate from trajectories.
    pub fn direction(&self, mesh: Arc<Mesh>, dim: usize, id: usize) -> Trajectory {
        let seed = self.seed.wrapping_add(id as u64).wrapping_add(1 << 32);
        self.draw(mesh, dim, seed, self.bound)
    }

    fn draw(&self, mesh: Arc<Mesh>, dim: usize, seed: u64, bound: f64) -> Trajectory {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = mesh.len();
        let raw: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-bound..=bound)).collect();
        let mut values = vec![0.0; n * dim];
        for j in 0..n {
            for k in 0..dim {
                let at = |i: usize| raw[i * dim + k];
                values[j * dim + k] = match (j, n) {
                    (_, 1) => at(0),
                    (0, _) => (2.0 * at(0) + at(1)) / 3.0,
                    (j, n) if j == n - 1 => (at(j - 1) + 2.0 * at(j)) / 3.0,
                    (j, _) => 0.25 * (at(j - 1) + 2.0 * at(j) + at(j + 1)),
                };
            }
        }
        Trajectory::from_values(mesh, dim, values).expect("sized by construction")
    }
}

/// Argument ranges for the monotonicity grid of condition B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BGrid {
    pub t_max: f64,
    pub w_max: f64,
    pub z_max: f64,
    pub points: usize,
}

/// Runs the condition suite for one (problem, majorant) pair.
#[derive(Debug, Clone)]
pub struct Checker<'a> {
    pub problem: Option<&'a VolterraProblem>,
    pub majorant: &'a MajorantSpec,
    pub lyapunov: Option<&'a LyapunovSpec>,
    pub sampler: Sampler,
    pub mesh: Arc<Mesh>,
    pub samples: usize,
    pub grid: BGrid,
}

struct SampleOutcome {
    checks: usize,
    worst: f64,
    witness: Option<Witness>,
}

fn cumulative(weights: &WeightTable, values: &[f64]) -> Vec<f64> {
    (0..values.len()).map(|j| weights.integrate(j, values)).collect()
}

impl<'a> Checker<'a> {
    pub fn new(majorant: &'a MajorantSpec, mesh: Arc<Mesh>, grid: BGrid) -> Self {
        Self {
            problem: None,
            majorant,
            lyapunov: None,
            sampler: Sampler::new(DEFAULT_SEED, 1.0),
            mesh,
            samples: DEFAULT_SAMPLES,
            grid,
        }
    }

    pub fn with_problem(mut self, p: &'a VolterraProblem) -> Self {
        self.problem = Some(p);
        self
    }

    pub fn with_lyapunov(mut self, l: &'a LyapunovSpec) -> Self {
        self.lyapunov = Some(l);
        self
    }

    pub fn with_sampler(mut self, sampler: Sampler, samples: usize) -> Self {
        self.sampler = sampler;
        self.samples = samples;
        self
    }

    fn f(&self, t: f64, w: f64) -> Result<f64> {
        Ok(self.majorant.f.eval(t, w)?)
    }

    /// `f(t_j, ∫_0^{t_j} γ(z))` at every node.
    fn majorant_rhs(&self, weights: &WeightTable, z: &[f64]) -> Result<Vec<f64>> {
        let g = z
            .iter()
            .map(|&x| self.majorant.gamma.eval(x))
            .collect::<Result<Vec<_>, _>>()?;
        let w = cumulative(weights, &g);
        self.mesh.nodes().iter().zip(&w).map(|(&t, &w)| self.f(t, w)).collect()
    }

    /// `‖F(u, t_j) − A u(t_j)‖` per node.
    fn defect(&self, p: &VolterraProblem, u: &Trajectory, weights: &WeightTable) -> Result<Vec<Vec<f64>>> {
        let f = eval_f_all(p, u, weights)?;
        let mut au = vec![0.0; p.dim()];
        Ok(f
            .into_iter()
            .enumerate()
            .map(|(j, mut fj)| {
                p.operator().apply(u.value(j), &mut au);
                fj.iter_mut().zip(&au).for_each(|(a, b)| *a -= b);
                fj
            })
            .collect())
    }

    fn sample_a(&self, p: &VolterraProblem, weights: &WeightTable, id: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let u = self.sampler.trajectory(self.mesh.clone(), p.dim(), id);
        let lhs = self.defect(p, &u, weights)?.iter().map(|d| max_abs(d)).collect();
        let rhs = self.majorant_rhs(weights, u.norms())?;
        Ok((lhs, rhs))
    }

    fn sample_d(&self, p: &VolterraProblem, weights: &WeightTable, id: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let u = self.sampler.trajectory(self.mesh.clone(), p.dim(), id);
        let v = self.sampler.direction(self.mesh.clone(), p.dim(), id);
        let sum: Vec<f64> = u.values().iter().zip(v.values()).map(|(a, b)| a + b).collect();
        let uv = Trajectory::from_values(self.mesh.clone(), p.dim(), sum)?;
        let d0 = self.defect(p, &u, weights)?;
        let d1 = self.defect(p, &uv, weights)?;
        let lhs = d0
            .iter()
            .zip(&d1)
            .map(|(a, b)| a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs())))
            .collect();
        let z0 = u.norms();
        let z1: Vec<f64> = z0.iter().zip(v.norms()).map(|(a, b)| a + b).collect();
        let r0 = self.majorant_rhs(weights, z0)?;
        let r1 = self.majorant_rhs(weights, &z1)?;
        Ok((lhs, r1.iter().zip(&r0).map(|(a, b)| a - b).collect()))
    }

    fn sample_e(&self, p: &VolterraProblem, weights: &WeightTable, id: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let u = self.sampler.trajectory(self.mesh.clone(), p.dim(), id);
        let v = self.sampler.direction(self.mesh.clone(), p.dim(), id);
        let eps = 1e-6 * (1.0 + u.max_norm());
        let shifted = |sign: f64| -> Result<Trajectory> {
            let vals = u.values().iter().zip(v.values()).map(|(a, b)| a + sign * eps * b).collect();
            Trajectory::from_values(self.mesh.clone(), p.dim(), vals)
        };
        let plus = self.defect(p, &shifted(1.0)?, weights)?;
        let minus = self.defect(p, &shifted(-1.0)?, weights)?;
        let lhs = plus
            .iter()
            .zip(&minus)
            .map(|(a, b)| a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, ((x - y) / (2.0 * eps)).abs())))
            .collect();
        let z = u.norms();
        let gamma = |x: f64| -> Result<f64> { Ok(self.majorant.gamma.eval(x)?) };
        let dz = |x: f64| -> Result<f64> {
            let h = 1e-6 * (1.0 + x.abs());
            // one-sided at 0 when γ is undefined below
            central_difference(gamma, x, h).or_else(|_| Ok((gamma(x + h)? - gamma(x)?) / h))
        };
        let g = z.iter().map(|&x| gamma(x)).collect::<Result<Vec<_>>>()?;
        let w = cumulative(weights, &g);
        let gv = z
            .iter()
            .zip(v.norms())
            .map(|(&x, &h)| Ok(dz(x)? * h))
            .collect::<Result<Vec<_>>>()?;
        let inner = cumulative(weights, &gv);
        let rhs = self
            .mesh
            .nodes()
            .iter()
            .zip(w.iter().zip(&inner))
            .map(|(&t, (&w, &i))| {
                let h = 1e-6 * (1.0 + w.abs());
                let fw = central_difference(|x| self.f(t, x), w, h)
                    .or_else(|_| Ok::<f64, Error>((self.f(t, w + h)? - self.f(t, w)?) / h))?;
                Ok(fw * i)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((lhs, rhs))
    }

    fn run_samples<F>(&self, condition: Condition, slack: impl Fn(f64) -> f64 + Sync, sample: F) -> Result<Vec<SampleOutcome>>
    where
        F: Fn(usize) -> Result<(Vec<f64>, Vec<f64>)> + Sync,
    {
        let nodes = self.mesh.nodes();
        (0..self.samples)
            .into_par_iter()
            .map(|id| {
                let (lhs, rhs) = sample(id)?;
                let mut worst = f64::INFINITY;
                let mut witness = None;
                for (j, (l, r)) in lhs.iter().zip(&rhs).enumerate() {
                    worst = worst.min(r - l);
                    if witness.is_none() && *l > r + slack(*r) {
                        witness = Some(Witness {
                            condition,
                            location: Location::Sample {
                                sample: id,
                                node: j,
                                t: nodes[j],
                            },
                            lhs: *l,
                            rhs: *r,
                            detail: String::new(),
                        });
                    }
                }
                Ok(SampleOutcome {
                    checks: lhs.len(),
                    worst,
                    witness,
                })
            })
            .collect()
    }

    fn sampled_entry(
        &self,
        condition: Condition,
        outcomes: Result<Vec<SampleOutcome>>,
        violations: &mut Vec<Witness>,
        note: &'static str,
    ) -> ConditionEntry {
        match outcomes {
            Ok(outcomes) => {
                let checks = outcomes.iter().map(|o| o.checks).sum();
                let worst = outcomes.iter().map(|o| o.worst).fold(f64::INFINITY, f64::min);
                let mut found: Vec<Witness> = outcomes.into_iter().filter_map(|o| o.witness).collect();
                found.sort_by(|a, b| {
                    let (ka, kb) = (a.sort_key(), b.sort_key());
                    ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(ka.2.cmp(&kb.2))
                });
                let status = match found.first() {
                    Some(w) => ConditionStatus::Fail(w.clone()),
                    None => ConditionStatus::Pass,
                };
                violations.extend(found);
                ConditionEntry {
                    condition,
                    status,
                    checks,
                    worst_margin: worst.is_finite().then_some(worst),
                    note,
                }
            }
            Err(e) => ConditionEntry {
                condition,
                status: ConditionStatus::Skipped(format!("evaluation failed: {e}")),
                checks: 0,
                worst_margin: None,
                note,
            },
        }
    }

    fn skipped(condition: Condition, reason: &str) -> ConditionEntry {
        ConditionEntry {
            condition,
            status: ConditionStatus::Skipped(reason.into()),
            checks: 0,
            worst_margin: None,
            note: "",
        }
    }

    pub fn check_a(&self, violations: &mut Vec<Witness>) -> ConditionEntry {
        let Some(p) = self.problem else {
            return Self::skipped(Condition::A, "no problem");
        };
        let weights = trapezoid_weights(&self.mesh);
        let out = self.run_samples(Condition::A, |_| A_SLACK, |id| self.sample_a(p, &weights, id));
        self.sampled_entry(Condition::A, out, violations, "sampled trajectories")
    }

    pub fn check_d(&self, violations: &mut Vec<Witness>) -> ConditionEntry {
        let Some(p) = self.problem else {
            return Self::skipped(Condition::D, "no problem");
        };
        let weights = trapezoid_weights(&self.mesh);
        let out = self.run_samples(
            Condition::D,
            |r| DE_ABS_SLACK + DE_REL_SLACK * r.abs(),
            |id| self.sample_d(p, &weights, id),
        );
        self.sampled_entry(Condition::D, out, violations, "sampled increments, finitely many directions")
    }

    pub fn check_e(&self, violations: &mut Vec<Witness>) -> ConditionEntry {
        let Some(p) = self.problem else {
            return Self::skipped(Condition::E, "no problem");
        };
        let weights = trapezoid_weights(&self.mesh);
        let out = self.run_samples(
            Condition::E,
            |r| DE_ABS_SLACK + DE_REL_SLACK * r.abs(),
            |id| self.sample_e(p, &weights, id),
        );
        self.sampled_entry(
            Condition::E,
            out,
            violations,
            "finite-difference derivatives, finitely many directions",
        )
    }

    fn b_steps(&self) -> Result<(usize, f64, Vec<Witness>)> {
        let g = self.grid;
        let n = g.points.max(100);
        let ts = uniform_grid(0.0, g.t_max, n);
        let ws = uniform_grid(0.0, g.w_max, n);
        let zs = uniform_grid(0.0, g.z_max, n);
        let mut checks = 0;
        let mut worst = f64::INFINITY;
        let mut found = Vec::new();
        let mut step = |function: &'static str, from: [f64; 2], to: [f64; 2], a: f64, b: f64| {
            checks += 1;
            worst = worst.min(b - a);
            if a > b + B_SLACK * a.abs().max(b.abs()).max(1.0) {
                found.push(Witness {
                    condition: Condition::B,
                    location: Location::Grid { function, from, to },
                    lhs: a,
                    rhs: b,
                    detail: String::new(),
                });
            }
        };
        // f in t at each ω, and in ω at each t, on a coarser cross grid
        let cross = 11.min(n);
        let tc = uniform_grid(0.0, g.t_max, cross);
        let wc = uniform_grid(0.0, g.w_max, cross);
        for &w in &wc {
            let vals = ts.iter().map(|&t| self.f(t, w)).collect::<Result<Vec<_>>>()?;
            for i in 1..n {
                step("f(t, .)", [ts[i - 1], w], [ts[i], w], vals[i - 1], vals[i]);
            }
        }
        for &t in &tc {
            let vals = ws.iter().map(|&w| self.f(t, w)).collect::<Result<Vec<_>>>()?;
            for i in 1..n {
                step("f(., w)", [t, ws[i - 1]], [t, ws[i]], vals[i - 1], vals[i]);
            }
        }
        let vals = zs
            .iter()
            .map(|&z| self.majorant.gamma.eval(z))
            .collect::<Result<Vec<_>, _>>()?;
        for i in 1..n {
            step("gamma", [zs[i - 1], 0.0], [zs[i], 0.0], vals[i - 1], vals[i]);
        }
        Ok((checks, worst, found))
    }

    pub fn check_b(&self, violations: &mut Vec<Witness>) -> ConditionEntry {
        match self.b_steps() {
            Ok((checks, worst, found)) => {
                let status = match found.first() {
                    Some(w) => ConditionStatus::Fail(w.clone()),
                    None => ConditionStatus::Pass,
                };
                violations.extend(found);
                ConditionEntry {
                    condition: Condition::B,
                    status,
                    checks,
                    worst_margin: worst.is_finite().then_some(worst),
                    note: "grid samples",
                }
            }
            Err(e) => Self::skipped(Condition::B, &format!("evaluation failed: {e}")),
        }
    }

    pub fn check_c(&self, violations: &mut Vec<Witness>) -> ConditionEntry {
        let Some(upper) = &self.majorant.upper else {
            return Self::skipped(Condition::C, "no upper solution supplied");
        };
        match check_upper_solution(self.majorant, upper, &self.mesh) {
            Ok(r) => {
                let status = match r.first_violation {
                    Some(v) => {
                        // the check is lhs ≥ rhs; as a witness, rhs ≤ lhs fails
                        let w = Witness {
                            condition: Condition::C,
                            location: Location::Node { node: v.node, t: v.t },
                            lhs: v.rhs,
                            rhs: v.lhs,
                            detail: "f(t, ∫γ(z′)) > z′(t)".into(),
                        };
                        violations.push(w.clone());
                        ConditionStatus::Fail(w)
                    }
                    None => ConditionStatus::Pass,
                };
                ConditionEntry {
                    condition: Condition::C,
                    status,
                    checks: r.nodes_checked,
                    worst_margin: None,
                    note: "mesh nodes, adaptive quadrature",
                }
            }
            Err(e) => Self::skipped(Condition::C, &format!("evaluation failed: {e}")),
        }
    }

    pub fn check_g(&self, violations: &mut Vec<Witness>) -> ConditionEntry {
        let Some(l) = self.lyapunov else {
            return Self::skipped(Condition::G, "no Lyapunov majorant");
        };
        let rs = uniform_grid(0.0, l.r_max, 101);
        let ts = uniform_grid(0.0, l.t_max, 101);
        match check_convexity(l, &rs, &ts) {
            Ok(r) => {
                let status = match r.first_violation {
                    Some(v) => {
                        let w = Witness {
                            condition: Condition::G,
                            location: Location::Point { r: v.r, t: v.t },
                            lhs: 0.0,
                            rhs: v.value,
                            detail: format!("{:?}", v.kind),
                        };
                        violations.push(w.clone());
                        ConditionStatus::Fail(w)
                    }
                    None => ConditionStatus::Pass,
                };
                ConditionEntry {
                    condition: Condition::G,
                    status,
                    checks: r.points,
                    worst_margin: None,
                    note: if r.degenerate { "grid samples; f vanishes on the grid" } else { "grid samples" },
                }
            }
            Err(e) => Self::skipped(Condition::G, &format!("evaluation failed: {e}")),
        }
    }

    /// All conditions in the order A, B, C, D, E, G.
    pub fn run(&self) -> ConditionReport {
        let mut violations = Vec::new();
        let entries = vec![
            self.check_a(&mut violations),
            self.check_b(&mut violations),
            self.check_c(&mut violations),
            self.check_d(&mut violations),
            self.check_e(&mut violations),
            self.check_g(&mut violations),
        ];
        violations.sort_by(|a, b| {
            let (ka, kb) = (a.sort_key(), b.sort_key());
            ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(ka.2.cmp(&kb.2))
        });
        ConditionReport {
            entries,
            violations,
            seed: self.sampler.seed,
            samples: self.samples,
        }
    }

    /// Re-evaluates a witness in isolation; true when the violation reproduces.
    pub fn replay(&self, w: &Witness) -> Result<bool> {
        let weights = trapezoid_weights(&self.mesh);
        let need = || self.problem.ok_or_else(|| Error::Precondition("witness needs a problem".into()));
        match (&w.condition, &w.location) {
            (Condition::A | Condition::D | Condition::E, Location::Sample { sample, node, .. }) => {
                let p = need()?;
                let (lhs, rhs) = match w.condition {
                    Condition::A => self.sample_a(p, &weights, *sample)?,
                    Condition::D => self.sample_d(p, &weights, *sample)?,
                    _ => self.sample_e(p, &weights, *sample)?,
                };
                let slack = if w.condition == Condition::A {
                    A_SLACK
                } else {
                    DE_ABS_SLACK + DE_REL_SLACK * rhs[*node].abs()
                };
                Ok(lhs[*node] > rhs[*node] + slack)
            }
            (Condition::B, Location::Grid { function, from, to }) => {
                let eval = |p: [f64; 2]| -> Result<f64> {
                    if *function == "gamma" {
                        Ok(self.majorant.gamma.eval(p[0])?)
                    } else {
                        self.f(p[0], p[1])
                    }
                };
                let (a, b) = (eval(*from)?, eval(*to)?);
                Ok(a > b + B_SLACK * a.abs().max(b.abs()).max(1.0))
            }
            (Condition::C, Location::Node { node, .. }) => {
                let upper = self
                    .majorant
                    .upper
                    .as_ref()
                    .ok_or_else(|| Error::Precondition("witness needs an upper solution".into()))?;
                let r = check_upper_solution(self.majorant, upper, &self.mesh)?;
                Ok(r.first_violation.is_some_and(|v| v.node == *node))
            }
            (Condition::G, Location::Point { r, t }) => {
                let l = self
                    .lyapunov
                    .ok_or_else(|| Error::Precondition("witness needs a Lyapunov majorant".into()))?;
                let rs = uniform_grid(0.0, l.r_max, 101);
                let ts = uniform_grid(0.0, l.t_max, 101);
                let rep = check_convexity(l, &rs, &ts)?;
                Ok(rep.first_violation.is_some_and(|v| v.r == *r && v.t == *t))
            }
            _ => Err(Error::Precondition("witness location does not match its condition".into())),
        }
    }
}
