//! Numerical integration: trapezoid tables for Volterra sums, tensor-product
//! multi-fold integrals, adaptive Gauss-Kronrod panels, integrals over
//! `[0, ∞)` and integrals up to a pole of the denominator.

use crate::error::{Error, Result};
use crate::expr::ExprError;
use crate::problem::{Grading, KernelStage, Mesh, Trajectory};

/// Upper bound on tensor-product points for one nested integral.
pub const MAX_TENSOR_POINTS: f64 = 1e8;

/// Composite trapezoid weights for `∫_0^{t_j}`, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    rows: Vec<Vec<f64>>,
}

impl WeightTable {
    /// Weights `w_{j,0..=j}`. Row 0 is empty.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.rows[j]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `Σ_k w_{j,k} values[k]`.
    pub fn integrate(&self, j: usize, values: &[f64]) -> f64 {
        self.rows[j].iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

pub fn trapezoid_weights(mesh: &Mesh) -> WeightTable {
    let t = mesh.nodes();
    let mut rows = Vec::with_capacity(t.len());
    rows.push(Vec::new());
    for j in 1..t.len() {
        let mut row = vec![0.0; j + 1];
        for k in 1..=j {
            let half = 0.5 * (t[k] - t[k - 1]);
            row[k - 1] += half;
            row[k] += half;
        }
        rows.push(row);
    }
    WeightTable { rows }
}

/// Tensor-product trapezoid approximation of the `i`-fold integral of the
/// stage kernel over `[0, t_j]^i`, using trajectory values at the nodes.
pub fn nested_integral(
    stage: &KernelStage,
    weights: &WeightTable,
    tr: &Trajectory,
    j: usize,
) -> Result<Vec<f64>> {
    let folds = stage.fold_count();
    let dim = stage.out_dim();
    let mut acc = vec![0.0; dim];
    if j == 0 {
        return Ok(acc);
    }
    let points = ((j + 1) as f64).powi(folds as i32);
    if points > MAX_TENSOR_POINTS {
        return Err(Error::CostLimit {
            evaluations: points,
            limit: MAX_TENSOR_POINTS,
        });
    }
    let row = weights.row(j);
    let nodes = tr.mesh().nodes();
    let t = nodes[j];
    let mut index = vec![0usize; folds];
    let mut s = vec![0.0; folds];
    let mut out = vec![0.0; dim];
    loop {
        let mut w = 1.0;
        for (q, &k) in index.iter().enumerate() {
            w *= row[k];
            s[q] = nodes[k];
        }
        if w != 0.0 {
            let u: Vec<&[f64]> = index.iter().map(|&k| tr.value(k)).collect();
            stage.eval(t, &s, &u, &mut out)?;
            for (a, o) in acc.iter_mut().zip(&out) {
                *a += w * o;
            }
        }
        // odometer increment over {0..=j}^folds
        let mut q = 0;
        loop {
            if q == folds {
                return Ok(acc);
            }
            index[q] += 1;
            if index[q] <= j {
                break;
            }
            index[q] = 0;
            q += 1;
        }
    }
}

/// Mesh on `[0, t_end]` with `n` intervals. `ratio = 1` is uniform; `ratio < 1`
/// shrinks consecutive gaps geometrically toward `t_end`.
pub fn graded_mesh(t_end: f64, n: usize, ratio: f64) -> Result<Mesh> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Precondition(format!("mesh end must be positive, got {t_end}")));
    }
    if n == 0 {
        return Err(Error::Precondition("mesh needs at least one interval".into()));
    }
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::Precondition(format!("grading ratio must lie in (0, 1], got {ratio}")));
    }
    let mut nodes = Vec::with_capacity(n + 1);
    nodes.push(0.0);
    if ratio == 1.0 {
        let h = t_end / n as f64;
        nodes.extend((1..n).map(|k| k as f64 * h));
    } else {
        let h0 = t_end * (1.0 - ratio) / (1.0 - ratio.powi(n as i32));
        let mut t = 0.0;
        let mut h = h0;
        for _ in 1..n {
            t += h;
            nodes.push(t);
            h *= ratio;
        }
    }
    nodes.push(t_end);
    let grading = if ratio == 1.0 {
        Grading::Uniform
    } else {
        Grading::Geometric { ratio }
    };
    Mesh::with_grading(nodes, grading)
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F>(f: &F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx)? + f(c + dx)?;
        kron += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Ok((kron * h, ((kron - gauss) * h).abs()))
}

/// Globally adaptive G7K15 quadrature on `[a, b]`. Returns (value, error estimate).
pub(crate) fn adaptive_gk<F>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    const MAX_PANELS: usize = 2000;
    if a == b {
        return Ok((0.0, 0.0));
    }
    let (v, e) = gk15(f, a, b)?;
    let mut panels = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) && panels.len() < MAX_PANELS {
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (pa, pb, pv, pe) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            panels.push((pa, pb, pv, pe));
            break;
        }
        let (lv, le) = gk15(f, pa, mid)?;
        let (rv, re) = gk15(f, mid, pb)?;
        total += lv + rv - pv;
        err += le + re - pe;
        panels.push((pa, mid, lv, le));
        panels.push((mid, pb, rv, re));
    }
    // resum to shed accumulated cancellation from the running updates
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    let total = panels.iter().map(|p| p.2).sum();
    let err = panels.iter().map(|p| p.3).sum();
    Ok((total, err))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImproperKind {
    Converged(f64),
    Divergent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImproperResult {
    pub kind: ImproperKind,
    /// Cumulative partial sums: `∫_0^1`, then `∫_0^{2^{k+1}}` for each window.
    pub trace: Vec<f64>,
}

impl ImproperResult {
    pub fn value(&self) -> Option<f64> {
        match self.kind {
            ImproperKind::Converged(v) => Some(v),
            ImproperKind::Divergent => None,
        }
    }
}

pub const DEFAULT_DIVERGENCE_CAP: f64 = 1e8;
const MAX_WINDOWS: usize = 60;
const STAGNATION_RATIO: f64 = 0.9;
const STAGNATION_WINDOWS: usize = 4;

/// Drives a doubling-window partial-sum sequence to a convergence decision.
///
/// `head` is the integral over the first segment and `window(k)` the increment
/// over window `k`. Converged once two consecutive increments fall below
/// `tol·max(1, total)`, in which case a geometric tail estimate is added.
/// Divergent when the total exceeds `cap`, when increments stop decaying, or
/// when the window budget runs out.
pub(crate) fn doubling_windows<W>(head: f64, mut window: W, tol: f64, cap: f64) -> Result<ImproperResult>
where
    W: FnMut(usize) -> Result<f64>,
{
    let mut total = head;
    let mut trace = vec![total];
    let mut small = 0;
    let mut stagnant = 0;
    let mut prev: Option<f64> = None;
    for k in 0..MAX_WINDOWS {
        let inc = window(k)?;
        total += inc;
        trace.push(total);
        if !total.is_finite() || total > cap {
            return Ok(ImproperResult {
                kind: ImproperKind::Divergent,
                trace,
            });
        }
        if inc < tol * total.max(1.0) {
            small += 1;
        } else {
            small = 0;
        }
        if small >= 2 {
            let tail = match prev {
                Some(p) if p > 0.0 && inc < p => {
                    let rho = inc / p;
                    inc * rho / (1.0 - rho)
                }
                _ => 0.0,
            };
            return Ok(ImproperResult {
                kind: ImproperKind::Converged(total + tail),
                trace,
            });
        }
        if let Some(p) = prev {
            if p > 0.0 && inc >= STAGNATION_RATIO * p {
                stagnant += 1;
            } else {
                stagnant = 0;
            }
            if stagnant >= STAGNATION_WINDOWS {
                return Ok(ImproperResult {
                    kind: ImproperKind::Divergent,
                    trace,
                });
            }
        }
        prev = Some(inc);
    }
    Ok(ImproperResult {
        kind: ImproperKind::Divergent,
        trace,
    })
}

fn reciprocal<G>(g: &G, w: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    let v = g(w)?;
    if v > 0.0 {
        Ok(1.0 / v)
    } else {
        Err(Error::Precondition(format!("integrand denominator g({w}) = {v} is not positive")))
    }
}

/// `∫_0^∞ dω / g(ω)` for positive `g`.
///
/// `[0, 1]` is integrated directly; each window `[2^k, 2^{k+1}]` is mapped by
/// `ω = 1/v` onto a finite panel.
pub fn improper_integral<G>(g: G, tol: f64, cap: f64) -> Result<ImproperResult>
where
    G: Fn(f64) -> Result<f64>,
{
    if !(tol > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    for k in 0..=64 {
        let w = k as f64 / 4.0;
        reciprocal(&g, w)?;
    }
    let inner_tol = (tol * 1e-4).max(1e-15);
    let h = |w: f64| reciprocal(&g, w);
    let (head, _) = adaptive_gk(&h, 0.0, 1.0, inner_tol, inner_tol)?;
    let mapped = |v: f64| -> Result<f64> { Ok(reciprocal(&g, 1.0 / v)? / (v * v)) };
    doubling_windows(
        head,
        |k| {
            let hi = 0.5f64.powi(k as i32);
            let lo = 0.5 * hi;
            Ok(adaptive_gk(&mapped, lo, hi, inner_tol * hi, inner_tol)?.0)
        },
        tol,
        cap,
    )
}

/// `∫_0^{ω*} dω / g(ω)` where `g → ∞` at `ω*`, so the integrand vanishes there.
///
/// Domain errors within a relative `1e-8` of `ω*` are read as the endpoint value 0.
pub fn integral_to_pole<G>(g: G, pole: f64, tol: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    if !(pole > 0.0) {
        return Err(Error::Precondition(format!("pole must be positive, got {pole}")));
    }
    let edge = pole * (1.0 - 1e-8);
    let h = |w: f64| -> Result<f64> {
        if w >= pole {
            return Ok(0.0);
        }
        match g(w) {
            Ok(v) if v > 0.0 => Ok(1.0 / v),
            Ok(v) if w >= edge && v.is_infinite() => Ok(0.0),
            Ok(v) => Err(Error::Precondition(format!(
                "integrand denominator g({w}) = {v} is not positive"
            ))),
            Err(Error::Expr(ExprError::Domain { .. })) if w >= edge => Ok(0.0),
            Err(e) => Err(e),
        }
    };
    let (v, _) = adaptive_gk(&h, 0.0, pole, tol * 1e-4, tol * 1e-4)?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ok(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Result<f64> {
        move |x| Ok(f(x))
    }

    #[test]
    fn trapezoid_rows() {
        let mesh = Mesh::new(vec![0.0, 0.5, 1.0]).unwrap();
        let w = trapezoid_weights(&mesh);
        assert!(w.row(0).is_empty());
        assert_eq!(w.row(2), &[0.25, 0.5, 0.25]);
        assert_eq!(w.row(1), &[0.25, 0.25]);
        assert_eq!(w.integrate(0, &[7.0]), 0.0);
        assert_eq!(w.integrate(2, &[0.0, 0.5, 1.0]), 0.5);
    }

    #[test]
    fn row_sums_match_nodes() {
        let mesh = graded_mesh(3.7, 57, 0.97).unwrap();
        let w = trapezoid_weights(&mesh);
        for (j, &t) in mesh.nodes().iter().enumerate() {
            let s: f64 = w.row(j).iter().sum();
            assert!((s - t).abs() <= 1e-14 * t.max(1e-300), "row {j}");
            assert!(w.row(j).iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn exact_on_affine_for_any_mesh() {
        let mesh = graded_mesh(2.0, 13, 0.8).unwrap();
        let w = trapezoid_weights(&mesh);
        let vals: Vec<f64> = mesh.nodes().iter().map(|&s| 3.0 * s - 1.0).collect();
        let j = mesh.len() - 1;
        let exact = 1.5 * 4.0 - 2.0;
        assert!((w.integrate(j, &vals) - exact).abs() <= 1e-13 * exact.abs());
    }

    #[test]
    fn second_order_on_sine() {
        let err = |n: usize| {
            let mesh = graded_mesh(1.0, n, 1.0).unwrap();
            let w = trapezoid_weights(&mesh);
            let vals: Vec<f64> = mesh.nodes().iter().map(|s| s.sin()).collect();
            (w.integrate(n, &vals) - (1.0 - 1f64.cos())).abs()
        };
        for n in [8, 16, 32, 64] {
            let order = (err(n) / err(2 * n)).log2();
            assert!(order >= 1.9, "n = {n}: order {order}");
        }
    }

    #[test]
    fn graded_meshes() {
        assert_eq!(graded_mesh(1.0, 4, 1.0).unwrap().nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let m = graded_mesh(1.0, 2, 0.5).unwrap();
        assert!((m.nodes()[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.nodes()[2], 1.0);
        assert_eq!(graded_mesh(2.5, 1, 0.3).unwrap().nodes(), &[0.0, 2.5]);
        let m = graded_mesh(1.0, 10, 0.9).unwrap();
        let t = m.nodes();
        for k in 1..9 {
            let ratio = (t[k + 1] - t[k]) / (t[k] - t[k - 1]);
            assert!((ratio - 0.9).abs() < 1e-12);
        }
        assert!(graded_mesh(0.0, 3, 1.0).is_err());
        assert!(graded_mesh(1.0, 0, 1.0).is_err());
        assert!(graded_mesh(1.0, 3, 1.5).is_err());
    }

    #[test]
    fn gauss_kronrod_smooth() {
        let (v, _) = adaptive_gk(&ok(|x: f64| x.exp()), 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((v - (2f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn improper_arctan() {
        let r = improper_integral(ok(|w| 1.0 + w * w), 1e-6, DEFAULT_DIVERGENCE_CAP).unwrap();
        assert!((r.value().unwrap() - PI / 2.0).abs() < 1e-6);
        assert!(r.trace.windows(2).all(|p| p[1] >= p[0]));
    }

    #[test]
    fn improper_exponential() {
        let r = improper_integral(ok(|w: f64| w.exp()), 1e-6, DEFAULT_DIVERGENCE_CAP).unwrap();
        assert!((r.value().unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn improper_log_divergence() {
        let r = improper_integral(ok(|w| w + 1.0), 1e-6, DEFAULT_DIVERGENCE_CAP).unwrap();
        assert_eq!(r.kind, ImproperKind::Divergent);
    }

    #[test]
    fn improper_rejects_non_positive() {
        assert!(matches!(
            improper_integral(ok(|w| w - 1.0), 1e-6, DEFAULT_DIVERGENCE_CAP),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn pole_integrals() {
        let v = integral_to_pole(ok(|w: f64| (1.0 - w).powf(-0.5)), 1.0, 1e-6).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-6);
        let v = integral_to_pole(ok(|w: f64| 1.0 / (1.0 - w)), 1.0, 1e-6).unwrap();
        assert!((v - 0.5).abs() < 1e-6);
        assert!(integral_to_pole(ok(|w| w), 0.0, 1e-6).is_err());
    }
}
