//! The majorant integral equation `z(t) = f(t, ∫_0^t γ(z(s)) ds)`.
//!
//! With `ω(t) = ∫_0^t γ(z)`, the equation is the Cauchy problem
//! `ω' = γ(f(t, ω))`, `ω(0) = 0`. When `f` does not depend on `t` it
//! separates: `Φ(ω) = ∫_0^ω dw / γ(f(w))` maps `[0, ∞)` (or `[0, ω*]` up to a
//! pole of `γ∘f`) bijectively onto `[0, T⁺)`, and `ω⁺ = Φ⁻¹`.
//!
//! For `t`-dependent `f` the same horizon is found by integrating the Cauchy
//! problem in `t` until `ω` reaches 1, then switching the independent
//! variable to `v = 1/ω` and integrating `dt/dv` to `v = 0`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::ExprError;
use crate::func::ScalarFn;
use crate::ode::{self, OdeOptions};
use crate::problem::Mesh;
use crate::quadrature::{
    adaptive_gk, doubling_windows, improper_integral, integral_to_pole, ImproperKind, DEFAULT_DIVERGENCE_CAP,
};
use crate::roots::{bisect_predicate, newton_bisect};

/// Default relative tolerance for horizon integrals.
pub const DEFAULT_IMPROPER_TOL: f64 = 1e-6;
/// Default stopping tolerance for Picard chains.
pub const DEFAULT_CHAIN_TOL: f64 = 1e-10;
pub const DEFAULT_CHAIN_MAX: usize = 10_000;
/// Default fraction of the horizon covered by solve meshes.
pub const DEFAULT_THETA: f64 = 0.95;
/// Slack for chain monotonicity and certificate sign checks.
pub const CHAIN_SLACK: f64 = 1e-12;

/// The pair `(f, γ)` with optional pole `ω*` and upper solution `z′`.
#[derive(Debug, Clone)]
pub struct MajorantSpec {
    /// `f(t, ω)`
    pub f: ScalarFn<2>,
    /// `γ(z)`
    pub gamma: ScalarFn<1>,
    pub pole: Option<f64>,
    /// Upper solution `z′(t)` for the comparison check.
    pub upper: Option<ScalarFn<1>>,
}

impl MajorantSpec {
    pub fn new(f: ScalarFn<2>, gamma: ScalarFn<1>) -> Result<Self> {
        let f00 = f.eval(0.0, 0.0)?;
        if f00 < 0.0 {
            return Err(Error::InvalidSpec(format!("f(0, 0) = {f00} is negative")));
        }
        Ok(Self {
            f,
            gamma,
            pole: None,
            upper: None,
        })
    }

    /// `f(t, ω)` from text over `t, w` and `γ(z)` from text over `z`.
    pub fn parse(f: &str, gamma: &str) -> Result<Self> {
        Self::new(ScalarFn::parse(f, ["t", "w"])?, ScalarFn::parse(gamma, ["z"])?)
    }

    pub fn with_pole(mut self, pole: f64) -> Self {
        self.pole = Some(pole);
        self
    }

    pub fn with_upper(mut self, upper: ScalarFn<1>) -> Self {
        self.upper = Some(upper);
        self
    }

    /// True when `f` ignores its time argument, so the Cauchy problem separates.
    pub fn is_autonomous(&self) -> bool {
        !self.f.uses_arg(0)
    }

    /// `γ(f(t, ω))`
    pub fn g(&self, t: f64, w: f64) -> Result<f64> {
        Ok(self.gamma.eval(self.f.eval(t, w)?)?)
    }

    /// `Φ(ω) = ∫_0^ω dw / γ(f(w))` for autonomous specs.
    pub fn phi(&self, w: f64) -> Result<f64> {
        if !self.is_autonomous() {
            return Err(Error::Precondition("Φ is defined for t-independent f only".into()));
        }
        let h = |x: f64| -> Result<f64> { Ok(1.0 / self.g(0.0, x)?) };
        // split at powers of two so each panel is well scaled
        let mut total = 0.0;
        let mut lo = 0.0;
        let mut hi = w.min(1.0);
        while lo < w {
            total += adaptive_gk(&h, lo, hi, 1e-15, 1e-14)?.0;
            lo = hi;
            hi = (2.0 * hi).min(w);
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// `ω⁺ → ∞` at a finite `T⁺`.
    ValueBlowUp,
    /// `γ∘f` has a pole `ω*`; the derivative of `z⁺` blows up at `T⁺ = Φ(ω*)`.
    DerivativeBlowUp,
    /// The solution continues to all `t ≥ 0`.
    Global,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::ValueBlowUp => "ValueBlowUp",
            Classification::DerivativeBlowUp => "DerivativeBlowUp",
            Classification::Global => "Global",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowUp {
    pub classification: Classification,
    /// `T⁺`, infinite for [`Classification::Global`].
    pub horizon: f64,
    pub pole: Option<f64>,
    /// `γ(f(0)) = 0`: the main solution is `ω ≡ 0`.
    pub degenerate: bool,
    /// Partial sums of the horizon integral.
    pub trace: Vec<f64>,
}

fn is_domain(e: &Error) -> bool {
    matches!(e, Error::Expr(ExprError::Domain { .. }))
}

/// Scans `ω = 2^k` for the first point where `g` stops being finite, then
/// brackets the boundary to `1e-10` relative. Returns `None` when `g` is
/// finite on the whole scan, and an error when `g` becomes undefined without
/// growing large first.
fn detect_pole<G>(g: G) -> Result<Option<f64>>
where
    G: Fn(f64) -> Result<f64>,
{
    const LARGE: f64 = 1e12;
    let finite = |w: f64| -> Result<bool> {
        match g(w) {
            Ok(v) => Ok(v.is_finite() && v <= LARGE),
            Err(e) if is_domain(&e) => Ok(false),
            Err(e) => Err(e),
        }
    };
    let mut prev = 0.0;
    for k in -20..=60 {
        let w = 2f64.powi(k);
        match g(w) {
            Ok(v) if v.is_finite() => {
                prev = w;
                continue;
            }
            Ok(_) => {}
            Err(e) if is_domain(&e) => {}
            Err(e) => return Err(e),
        }
        let (lo, hi) = bisect_predicate(finite, prev, w, 1e-10)?;
        let near = g(lo).unwrap_or(f64::INFINITY);
        let base = g(0.0)?.abs().max(1.0);
        if near < 1e4 * base {
            return Err(Error::InvalidSpec(format!(
                "γ(f(ω)) is undefined beyond ω ≈ {lo} but does not blow up there (value {near})"
            )));
        }
        return Ok(Some(hi));
    }
    Ok(None)
}

/// Decides between value blow-up, derivative blow-up and global existence,
/// and computes the horizon `T⁺`.
pub fn classify_blowup(spec: &MajorantSpec, tol: f64) -> Result<BlowUp> {
    if spec.is_autonomous() {
        classify_separable(spec, tol)
    } else {
        classify_time_dependent(spec, tol)
    }
}

fn classify_separable(spec: &MajorantSpec, tol: f64) -> Result<BlowUp> {
    let g = |w: f64| spec.g(0.0, w);
    let g0 = g(0.0)?;
    if g0 < 0.0 {
        return Err(Error::Precondition(format!("γ(f(0)) = {g0} is negative")));
    }
    if g0 == 0.0 {
        return Ok(BlowUp {
            classification: Classification::Global,
            horizon: f64::INFINITY,
            pole: None,
            degenerate: true,
            trace: vec![],
        });
    }
    let pole = match spec.pole {
        Some(p) if p > 0.0 => Some(p),
        Some(p) => return Err(Error::InvalidSpec(format!("pole must be positive, got {p}"))),
        None => detect_pole(g)?,
    };
    if let Some(p) = pole {
        let horizon = integral_to_pole(g, p, tol)?;
        return Ok(BlowUp {
            classification: Classification::DerivativeBlowUp,
            horizon,
            pole: Some(p),
            degenerate: false,
            trace: vec![horizon],
        });
    }
    let r = improper_integral(g, tol, DEFAULT_DIVERGENCE_CAP)?;
    Ok(match r.kind {
        ImproperKind::Converged(horizon) => BlowUp {
            classification: Classification::ValueBlowUp,
            horizon,
            pole: None,
            degenerate: false,
            trace: r.trace,
        },
        ImproperKind::Divergent => BlowUp {
            classification: Classification::Global,
            horizon: f64::INFINITY,
            pole: None,
            degenerate: false,
            trace: r.trace,
        },
    })
}

fn ode_options(tol: f64) -> OdeOptions {
    OdeOptions {
        rtol: (tol * 1e-6).clamp(1e-13, 1e-10),
        atol: 1e-15,
        ..OdeOptions::default()
    }
}

fn classify_time_dependent(spec: &MajorantSpec, tol: f64) -> Result<BlowUp> {
    let g0 = spec.g(0.0, 0.0)?;
    if g0 < 0.0 {
        return Err(Error::Precondition(format!("γ(f(0, 0)) = {g0} is negative")));
    }
    let opts = ode_options(tol);
    let cap = DEFAULT_DIVERGENCE_CAP;
    let switch = spec.pole.map_or(1.0, |p| (0.5 * p).min(1.0));
    let rhs = |t: f64, w: f64| spec.g(t, w);
    let first = ode::integrate(&rhs, 0.0, 0.0, cap, opts, |_, w| w >= switch)?;
    if !first.stopped {
        return Ok(BlowUp {
            classification: Classification::Global,
            horizon: f64::INFINITY,
            pole: None,
            degenerate: first.y == 0.0,
            trace: vec![first.x],
        });
    }
    let (t_s, w_s) = (first.x, first.y);

    if let Some(pole) = spec.pole {
        // dt/dω = 1/g(t, ω) vanishes at the pole
        let edge = pole * (1.0 - 1e-8);
        let dt = |w: f64, t: f64| -> Result<f64> {
            if w >= pole {
                return Ok(0.0);
            }
            match spec.g(t, w) {
                Ok(v) if v > 0.0 => Ok(1.0 / v),
                Ok(v) if w >= edge && v.is_infinite() => Ok(0.0),
                Ok(v) => Err(Error::Precondition(format!("γ(f({t}, {w})) = {v} is not positive"))),
                Err(e) if w >= edge && is_domain(&e) => Ok(0.0),
                Err(e) => Err(e),
            }
        };
        let end = ode::integrate(&dt, w_s, t_s, pole, opts, |_, _| false)?;
        return Ok(BlowUp {
            classification: Classification::DerivativeBlowUp,
            horizon: end.y,
            pole: Some(pole),
            degenerate: false,
            trace: vec![t_s, end.y],
        });
    }

    // σ = −v = −1/ω increases toward 0; dt/dσ = 1/(v² g(t, 1/v))
    let v_s = 1.0 / w_s;
    let dt = |sigma: f64, t: f64| -> Result<f64> {
        let v = -sigma;
        let gv = spec.g(t, 1.0 / v)?;
        if !(gv > 0.0) {
            return Err(Error::Precondition(format!("γ(f({t}, {})) = {gv} is not positive", 1.0 / v)));
        }
        Ok(1.0 / (v * v * gv))
    };
    let mut t = t_s;
    let r = doubling_windows(
        t_s,
        |k| {
            let hi = v_s * 0.5f64.powi(k as i32);
            let lo = 0.5 * hi;
            let end = ode::integrate(&dt, -hi, t, -lo, opts, |_, _| false)?;
            let inc = end.y - t;
            t = end.y;
            Ok(inc)
        },
        tol,
        cap,
    )?;
    Ok(match r.kind {
        ImproperKind::Converged(horizon) => BlowUp {
            classification: Classification::ValueBlowUp,
            horizon,
            pole: None,
            degenerate: false,
            trace: r.trace,
        },
        ImproperKind::Divergent => BlowUp {
            classification: Classification::Global,
            horizon: f64::INFINITY,
            pole: None,
            degenerate: false,
            trace: r.trace,
        },
    })
}

/// `ω⁺` and `z⁺ = f(t, ω⁺)` at the mesh nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchySolution {
    pub omega: Vec<f64>,
    pub z: Vec<f64>,
}

/// Cumulative `Φ` on a graded `ω` grid, extended on demand.
struct PhiTable<'a> {
    spec: &'a MajorantSpec,
    pole: Option<f64>,
    w: Vec<f64>,
    phi: Vec<f64>,
}

impl<'a> PhiTable<'a> {
    fn new(spec: &'a MajorantSpec, pole: Option<f64>) -> Self {
        Self {
            spec,
            pole,
            w: vec![0.0],
            phi: vec![0.0],
        }
    }

    fn recip(&self, w: f64) -> Result<f64> {
        if let Some(p) = self.pole {
            if w >= p {
                return Ok(0.0);
            }
        }
        let v = self.spec.g(0.0, w)?;
        if v > 0.0 {
            Ok(1.0 / v)
        } else {
            Err(Error::Precondition(format!("γ(f({w})) = {v} is not positive")))
        }
    }

    /// Next grid point: uniform steps of 1/64 on `[0, 1]`, ratio `2^{1/8}`
    /// beyond, and geometric refinement toward a pole.
    fn next_point(&self, w: f64) -> Option<f64> {
        match self.pole {
            Some(p) => {
                let gap = p - w;
                if gap <= p * 1e-13 {
                    None
                } else {
                    Some(p - gap * 0.5f64.powf(0.25))
                }
            }
            None => {
                let next = if w < 1.0 { w + 1.0 / 64.0 } else { w * 2f64.powf(0.125) };
                (next < 1e300).then_some(next)
            }
        }
    }

    /// Index `k` with `phi[k-1] < t ≤ phi[k]`.
    fn bracket(&mut self, t: f64) -> Result<Option<usize>> {
        loop {
            let last = *self.phi.last().expect("non-empty");
            if last >= t {
                let k = self.phi.partition_point(|&p| p < t).max(1);
                return Ok(Some(k));
            }
            let w0 = *self.w.last().expect("non-empty");
            let Some(w1) = self.next_point(w0) else {
                return Ok(None);
            };
            let h = |x: f64| self.recip(x);
            let (inc, _) = adaptive_gk(&h, w0, w1, 1e-16, 1e-14)?;
            self.w.push(w1);
            self.phi.push(last + inc);
        }
    }

    fn invert(&mut self, t: f64) -> Result<Option<f64>> {
        if t == 0.0 {
            return Ok(Some(0.0));
        }
        let Some(k) = self.bracket(t)? else {
            return Ok(None);
        };
        let (w0, w1, base) = (self.w[k - 1], self.w[k], self.phi[k - 1]);
        let this = &*self;
        let fdf = |w: f64| -> Result<(f64, f64)> {
            let h = |x: f64| this.recip(x);
            let (part, _) = adaptive_gk(&h, w0, w, 1e-16, 1e-14)?;
            Ok((base + part - t, this.recip(w)?))
        };
        newton_bisect(fdf, w0, w1, 1e-15, 200).map(Some)
    }
}

/// Solves the Cauchy problem on the mesh nodes: by inverting `Φ` when `f` is
/// autonomous, by adaptive integration otherwise.
pub fn solve_cauchy(spec: &MajorantSpec, blowup: &BlowUp, mesh: &Mesh) -> Result<CauchySolution> {
    if !(mesh.end() < blowup.horizon) {
        return Err(Error::Precondition(format!(
            "mesh end {} must lie before the horizon {}",
            mesh.end(),
            blowup.horizon
        )));
    }
    let nodes = mesh.nodes();
    let omega = if blowup.degenerate && spec.is_autonomous() {
        vec![0.0; nodes.len()]
    } else if spec.is_autonomous() {
        let mut table = PhiTable::new(spec, blowup.pole);
        nodes
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                table
                    .invert(t)
                    .map_err(|e| Error::at_node(j, e))?
                    .ok_or(Error::Bracket { node: j, t })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        let rhs = |t: f64, w: f64| spec.g(t, w);
        let opts = ode_options(1e-6);
        let mut out = Vec::with_capacity(nodes.len());
        out.push(0.0);
        let mut w = 0.0;
        for j in 1..nodes.len() {
            w = ode::integrate(&rhs, nodes[j - 1], w, nodes[j], opts, |_, _| false)
                .map_err(|e| Error::at_node(j, e))?
                .y;
            out.push(w);
        }
        out
    };
    let z = nodes
        .iter()
        .zip(&omega)
        .enumerate()
        .map(|(j, (&t, &w))| spec.f.eval(t, w).map_err(|e| Error::at_node(j, e)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CauchySolution { omega, z })
}

/// Picard iterates `z_0 = 0`, `z_n = f(t, ∫γ(z_{n−1}))` on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardChain {
    pub iterates: Vec<Vec<f64>>,
    pub converged: bool,
    /// Max-node change of the final step.
    pub last_change: f64,
}

impl PicardChain {
    pub fn last(&self) -> &[f64] {
        self.iterates.last().expect("chain starts with z_0")
    }

    /// `z_n`, or the last iterate when `n` is past the end of the chain.
    pub fn get(&self, n: usize) -> &[f64] {
        &self.iterates[n.min(self.iterates.len() - 1)]
    }

    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }
}

/// Iterates until the max-node change drops below `tol` or `n_max` steps.
/// Failing to converge is reported in the chain, not as an error.
pub fn majorant_picard(spec: &MajorantSpec, mesh: &Mesh, n_max: usize, tol: f64) -> Result<PicardChain> {
    let t = mesh.nodes();
    let n = t.len();
    let mut iterates = vec![vec![0.0; n]];
    let mut gam = vec![0.0; n];
    let mut last_change = f64::INFINITY;
    for _ in 0..n_max {
        let prev = iterates.last().expect("non-empty");
        for (j, (g, &z)) in gam.iter_mut().zip(prev).enumerate() {
            *g = spec.gamma.eval(z).map_err(|e| Error::at_node(j, e))?;
        }
        let mut next = Vec::with_capacity(n);
        let mut w = 0.0;
        for j in 0..n {
            if j > 0 {
                w += 0.5 * (t[j] - t[j - 1]) * (gam[j - 1] + gam[j]);
            }
            next.push(spec.f.eval(t[j], w).map_err(|e| Error::at_node(j, e))?);
        }
        last_change = next.iter().zip(prev).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()));
        iterates.push(next);
        if last_change < tol {
            return Ok(PicardChain {
                iterates,
                converged: true,
                last_change,
            });
        }
    }
    Ok(PicardChain {
        iterates,
        converged: false,
        last_change,
    })
}

/// Per-iterate bounds `b_n(t_j) = z⁺(t_j) − z_n(t_j)`.
pub fn certified_tail(chain: &PicardChain, z_plus: &[f64]) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(chain.iterates.len());
    for (n, z) in chain.iterates.iter().enumerate() {
        if z.len() != z_plus.len() {
            return Err(Error::Precondition("chain and z⁺ must share a mesh".into()));
        }
        let row = z_plus
            .iter()
            .zip(z)
            .enumerate()
            .map(|(j, (zp, zn))| {
                let b = zp - zn;
                if b < -CHAIN_SLACK * zp.abs().max(1.0) {
                    Err(Error::Inconsistent(format!(
                        "negative tail bound {b:e} at iterate {n}, node {j}"
                    )))
                } else {
                    Ok(b.max(0.0))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(prev) = out.last() {
            if let Some(j) = row
                .iter()
                .zip(prev)
                .position(|(b, p)| *b > p + CHAIN_SLACK * p.abs().max(1.0))
            {
                return Err(Error::Inconsistent(format!(
                    "tail bound increases from iterate {} to {n} at node {j}",
                    n - 1
                )));
            }
        }
        out.push(row);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperViolation {
    pub node: usize,
    pub t: f64,
    /// `z′(t)`
    pub lhs: f64,
    /// `f(t, ∫_0^t γ(z′))`
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperSolutionReport {
    pub holds: bool,
    pub nodes_checked: usize,
    pub first_violation: Option<UpperViolation>,
}

/// Slack for the comparison `z′ ≥ f(t, ∫γ(z′))`.
pub const UPPER_SLACK: f64 = 1e-10;

/// Checks `z′(t_j) ≥ f(t_j, ∫_0^{t_j} γ(z′(s)) ds)` at every node. The
/// integrals are computed by adaptive quadrature between nodes, so equality
/// cases are not disturbed by mesh error.
pub fn check_upper_solution(spec: &MajorantSpec, upper: &ScalarFn<1>, mesh: &Mesh) -> Result<UpperSolutionReport> {
    let t = mesh.nodes();
    let integrand = |s: f64| -> Result<f64> { Ok(spec.gamma.eval(upper.eval(s)?)?) };
    let mut w = 0.0;
    for j in 0..t.len() {
        if j > 0 {
            w += adaptive_gk(&integrand, t[j - 1], t[j], 1e-15, 1e-14)
                .map_err(|e| Error::at_node(j, e))?
                .0;
        }
        let lhs = upper.eval(t[j]).map_err(|e| Error::at_node(j, e))?;
        let rhs = spec.f.eval(t[j], w).map_err(|e| Error::at_node(j, e))?;
        if lhs < rhs - UPPER_SLACK {
            return Ok(UpperSolutionReport {
                holds: false,
                nodes_checked: j + 1,
                first_violation: Some(UpperViolation { node: j, t: t[j], lhs, rhs }),
            });
        }
    }
    Ok(UpperSolutionReport {
        holds: true,
        nodes_checked: t.len(),
        first_violation: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorantOptions {
    pub improper_tol: f64,
    pub chain_tol: f64,
    pub chain_max: usize,
}

impl Default for MajorantOptions {
    fn default() -> Self {
        Self {
            improper_tol: DEFAULT_IMPROPER_TOL,
            chain_tol: DEFAULT_CHAIN_TOL,
            chain_max: DEFAULT_CHAIN_MAX,
        }
    }
}

/// Classification, Cauchy solution and Picard chain on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorantSolution {
    pub blowup: BlowUp,
    pub mesh: Arc<Mesh>,
    pub omega: Vec<f64>,
    /// Cauchy-reduction solution `z⁺ = f(t, ω⁺)`.
    pub z_plus: Vec<f64>,
    pub chain: PicardChain,
}

impl MajorantSolution {
    pub fn classification(&self) -> Classification {
        self.blowup.classification
    }

    pub fn horizon(&self) -> f64 {
        self.blowup.horizon
    }

    /// Limit of the discrete Picard chain, the `z⁺` matching the mesh rule.
    pub fn z_limit(&self) -> &[f64] {
        self.chain.last()
    }

    /// Chain monotone in `n` and in `t`, all iterates below the chain limit,
    /// `ω⁺` nondecreasing.
    pub fn check_invariants(&self) -> Result<()> {
        let limit = self.z_limit();
        for (n, pair) in self.chain.iterates.windows(2).enumerate() {
            for (j, (a, b)) in pair[0].iter().zip(&pair[1]).enumerate() {
                if *a > b + CHAIN_SLACK * b.abs().max(1.0) {
                    return Err(Error::Inconsistent(format!("z_{n} > z_{} at node {j}", n + 1)));
                }
            }
        }
        for (n, z) in self.chain.iterates.iter().enumerate() {
            if let Some(j) = z.windows(2).position(|w| w[0] > w[1] + CHAIN_SLACK * w[1].abs().max(1.0)) {
                return Err(Error::Inconsistent(format!("z_{n} decreases in t at node {j}")));
            }
            if let Some(j) = z.iter().zip(limit).position(|(a, b)| *a > b + CHAIN_SLACK * b.abs().max(1.0)) {
                return Err(Error::Inconsistent(format!("z_{n} exceeds the chain limit at node {j}")));
            }
        }
        if let Some(j) = self.omega.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::Inconsistent(format!("ω⁺ decreases at node {j}")));
        }
        Ok(())
    }
}

/// Runs the full majorant pipeline on `mesh`, which must end before `T⁺`.
pub fn solve_majorant(spec: &MajorantSpec, mesh: Arc<Mesh>, opts: MajorantOptions) -> Result<MajorantSolution> {
    let blowup = classify_blowup(spec, opts.improper_tol)?;
    solve_majorant_with(spec, blowup, mesh, opts)
}

/// As [`solve_majorant`] with a precomputed classification.
pub fn solve_majorant_with(
    spec: &MajorantSpec,
    blowup: BlowUp,
    mesh: Arc<Mesh>,
    opts: MajorantOptions,
) -> Result<MajorantSolution> {
    let cauchy = solve_cauchy(spec, &blowup, &mesh)?;
    let chain = majorant_picard(spec, &mesh, opts.chain_max, opts.chain_tol)?;
    Ok(MajorantSolution {
        blowup,
        mesh,
        omega: cauchy.omega,
        z_plus: cauchy.z,
        chain,
    })
}
