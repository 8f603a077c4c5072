//! The operator equation `F(u, t) = Φ(ω_1(t), …, ω_n(t), u(t), t) = 0` on a
//! finite-dimensional state space, its fixed-point form
//! `u = L(u) = u − A⁻¹F(u, t)`, meshes and trajectories.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{self, ExprError};
use crate::operators::LinearOperator;
use crate::quadrature::{nested_integral, WeightTable};

/// Max-abs norm on `ℝ^m`.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    Uniform,
    Geometric { ratio: f64 },
    Custom,
}

/// Strictly increasing nodes `0 = t_0 < … < t_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
    grading: Grading,
}

impl Mesh {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        Self::with_grading(nodes, Grading::Custom)
    }

    pub fn with_grading(nodes: Vec<f64>, grading: Grading) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Precondition("mesh needs at least two nodes".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::Precondition("mesh must start at t = 0".into()));
        }
        if let Some(k) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition(format!(
                "mesh nodes must strictly increase (nodes {k} and {})",
                k + 1
            )));
        }
        Ok(Self { nodes, grading })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn end(&self) -> f64 {
        *self.nodes.last().expect("non-empty")
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }
}

/// Node values of the unknown, with per-node max-abs norms.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    mesh: Arc<Mesh>,
    dim: usize,
    values: Vec<f64>,
    norms: Vec<f64>,
    certified_bound: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn zeros(mesh: Arc<Mesh>, dim: usize) -> Self {
        let n = mesh.len();
        Self {
            mesh,
            dim,
            values: vec![0.0; n * dim],
            norms: vec![0.0; n],
            certified_bound: None,
        }
    }

    /// Values laid out node-major: `values[j*dim..(j+1)*dim]` is `u(t_j)`.
    pub fn from_values(mesh: Arc<Mesh>, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || values.len() != mesh.len() * dim {
            return Err(Error::Precondition(format!(
                "trajectory needs {} values, got {}",
                mesh.len() * dim,
                values.len()
            )));
        }
        let norms = values.chunks(dim).map(max_abs).collect();
        Ok(Self {
            mesh,
            dim,
            values,
            norms,
            certified_bound: None,
        })
    }

    pub fn from_fn<F>(mesh: Arc<Mesh>, dim: usize, mut f: F) -> Self
    where
        F: FnMut(f64, &mut [f64]),
    {
        let mut values = vec![0.0; mesh.len() * dim];
        for (t, chunk) in mesh.nodes().iter().zip(values.chunks_mut(dim)) {
            f(*t, chunk);
        }
        Self::from_values(mesh, dim, values).expect("sized by construction")
    }

    pub fn with_certified_bound(mut self, bound: Vec<f64>) -> Result<Self> {
        if bound.len() != self.mesh.len() {
            return Err(Error::Precondition("bound length must match the mesh".into()));
        }
        self.certified_bound = Some(bound);
        Ok(self)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, j: usize) -> &[f64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self, j: usize) -> f64 {
        self.norms[j]
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn max_norm(&self) -> f64 {
        self.norms.iter().fold(0.0, |m, &x| m.max(x))
    }

    pub fn certified_bound(&self) -> Option<&[f64]> {
        self.certified_bound.as_deref()
    }

    /// Per-node `‖self(t_j) − other(t_j)‖`.
    pub fn distance(&self, other: &Trajectory) -> Vec<f64> {
        self.values
            .chunks(self.dim)
            .zip(other.values.chunks(other.dim))
            .map(|(a, b)| a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs())))
            .collect()
    }
}

type KernelFn = dyn Fn(f64, &[f64], &[&[f64]], &mut [f64]) -> Result<(), ExprError> + Send + Sync;
type OuterFn = dyn Fn(&[&[f64]], &[f64], f64, &mut [f64]) -> Result<(), ExprError> + Send + Sync;

/// The `i`-fold kernel `K_i(t, s_1..s_i, u(s_1)..u(s_i)) ∈ ℝ^m`.
#[derive(Clone)]
pub struct KernelStage {
    folds: usize,
    dim: usize,
    eval: Arc<KernelFn>,
}

impl fmt::Debug for KernelStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KernelStage(folds = {}, dim = {})", self.folds, self.dim)
    }
}

impl KernelStage {
    pub fn new<F>(folds: usize, dim: usize, f: F) -> Result<Self>
    where
        F: Fn(f64, &[f64], &[&[f64]], &mut [f64]) -> Result<(), ExprError> + Send + Sync + 'static,
    {
        if folds == 0 || dim == 0 {
            return Err(Error::InvalidSpec("kernel needs folds ≥ 1 and dim ≥ 1".into()));
        }
        Ok(Self {
            folds,
            dim,
            eval: Arc::new(f),
        })
    }

    /// Scalar kernel from an expression. Variables: `t, s, u` for one fold;
    /// `t, s1..si, u1..ui` for `i` folds.
    pub fn scalar(text: &str, folds: usize) -> Result<Self> {
        let vars = kernel_vars(folds);
        let names: Vec<&str> = vars.iter().map(String::as_str).collect();
        let e = expr::parse(text, &names)?;
        Self::new(folds, 1, move |t, s, u, out| {
            let mut slots = Vec::with_capacity(1 + 2 * s.len());
            slots.push(t);
            slots.extend_from_slice(s);
            slots.extend(u.iter().map(|x| x[0]));
            out[0] = e.eval_slots(&slots)?;
            Ok(())
        })
    }

    pub fn fold_count(&self) -> usize {
        self.folds
    }

    pub fn out_dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, t: f64, s: &[f64], u: &[&[f64]], out: &mut [f64]) -> Result<(), ExprError> {
        (self.eval)(t, s, u, out)
    }
}

pub fn kernel_vars(folds: usize) -> Vec<String> {
    if folds == 1 {
        return vec!["t".into(), "s".into(), "u".into()];
    }
    let mut v = vec!["t".to_string()];
    v.extend((1..=folds).map(|i| format!("s{i}")));
    v.extend((1..=folds).map(|i| format!("u{i}")));
    v
}

/// The outer map `Φ(ω_1..ω_n, u, t) ∈ ℝ^m`.
#[derive(Clone)]
pub struct OuterMap {
    eval: Arc<OuterFn>,
}

impl fmt::Debug for OuterMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("OuterMap")
    }
}

impl OuterMap {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[&[f64]], &[f64], f64, &mut [f64]) -> Result<(), ExprError> + Send + Sync + 'static,
    {
        Self { eval: Arc::new(f) }
    }

    /// Scalar outer map from an expression over `w` (or `w1..wn`), `u`, `t`.
    pub fn scalar(text: &str, stages: usize) -> Result<Self> {
        let vars = outer_vars(stages);
        let names: Vec<&str> = vars.iter().map(String::as_str).collect();
        let e = expr::parse(text, &names)?;
        Ok(Self::new(move |w, u, t, out| {
            let mut slots: Vec<f64> = w.iter().map(|x| x[0]).collect();
            slots.push(u[0]);
            slots.push(t);
            out[0] = e.eval_slots(&slots)?;
            Ok(())
        }))
    }

    pub fn eval(&self, w: &[&[f64]], u: &[f64], t: f64, out: &mut [f64]) -> Result<(), ExprError> {
        (self.eval)(w, u, t, out)
    }
}

pub fn outer_vars(stages: usize) -> Vec<String> {
    let mut v: Vec<String> = if stages == 1 {
        vec!["w".into()]
    } else {
        (1..=stages).map(|i| format!("w{i}")).collect()
    };
    v.push("u".into());
    v.push("t".into());
    v
}

/// `F(u, t) = Φ(∫K_1, …, ∫…∫K_n, u, t)` with a linear operator `A` for the
/// fixed-point form.
#[derive(Debug, Clone)]
pub struct VolterraProblem {
    dim: usize,
    stages: Vec<KernelStage>,
    outer: OuterMap,
    operator: Arc<dyn LinearOperator>,
    inv_norm_bound: f64,
    t_max: f64,
    base_point: Vec<f64>,
}

/// Tolerance for the base-point identity `Φ(0, …, 0, u_0, 0) = 0`.
pub const BASE_POINT_TOL: f64 = 1e-10;

impl VolterraProblem {
    pub fn new(
        stages: Vec<KernelStage>,
        outer: OuterMap,
        operator: Arc<dyn LinearOperator>,
        inv_norm_bound: f64,
        t_max: f64,
    ) -> Result<Self> {
        let dim = operator.dim();
        Self::with_base_point(stages, outer, operator, inv_norm_bound, t_max, vec![0.0; dim])
    }

    pub fn with_base_point(
        stages: Vec<KernelStage>,
        outer: OuterMap,
        operator: Arc<dyn LinearOperator>,
        inv_norm_bound: f64,
        t_max: f64,
        base_point: Vec<f64>,
    ) -> Result<Self> {
        let dim = operator.dim();
        if dim == 0 {
            return Err(Error::InvalidSpec("state dimension must be positive".into()));
        }
        if let Some(s) = stages.iter().find(|s| s.out_dim() != dim) {
            return Err(Error::InvalidSpec(format!(
                "kernel output dimension {} differs from state dimension {dim}",
                s.out_dim()
            )));
        }
        if !(inv_norm_bound > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "inverse-norm bound must be positive, got {inv_norm_bound}"
            )));
        }
        if !(t_max > 0.0) {
            return Err(Error::InvalidSpec(format!("horizon must be positive, got {t_max}")));
        }
        if base_point.len() != dim {
            return Err(Error::InvalidSpec("base point has the wrong dimension".into()));
        }
        check_invertible(operator.as_ref())?;
        let p = Self {
            dim,
            stages,
            outer,
            operator,
            inv_norm_bound,
            t_max,
            base_point,
        };
        let zeros = vec![0.0; dim];
        let w: Vec<&[f64]> = p.stages.iter().map(|_| zeros.as_slice()).collect();
        let mut out = vec![0.0; dim];
        p.outer.eval(&w, &p.base_point, 0.0, &mut out)?;
        if max_abs(&out) > BASE_POINT_TOL {
            return Err(Error::InvalidSpec(format!(
                "outer map does not vanish at the base point: ‖Φ(0, u0, 0)‖ = {:e}",
                max_abs(&out)
            )));
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stages(&self) -> &[KernelStage] {
        &self.stages
    }

    pub fn operator(&self) -> &dyn LinearOperator {
        self.operator.as_ref()
    }

    pub fn inv_norm_bound(&self) -> f64 {
        self.inv_norm_bound
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn base_point(&self) -> &[f64] {
        &self.base_point
    }

    /// Largest kernel fold count; three or more costs `O(N^i)` per node.
    pub fn max_folds(&self) -> usize {
        self.stages.iter().map(KernelStage::fold_count).max().unwrap_or(0)
    }
}

fn check_invertible(op: &dyn LinearOperator) -> Result<()> {
    let m = op.dim();
    let mut e = vec![0.0; m];
    let mut x = vec![0.0; m];
    let mut back = vec![0.0; m];
    for i in 0..m {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[i] = 1.0;
        op.solve(&e, &mut x)?;
        op.apply(&x, &mut back);
        let scale = 1.0 + max_abs(&x);
        let err = back.iter().zip(&e).fold(0.0, |a, (b, c)| f64::max(a, (b - c).abs()));
        if !x.iter().all(|v| v.is_finite()) || err > 1e-8 * scale {
            return Err(Error::Singular(format!("solve against unit column {i} failed")));
        }
    }
    Ok(())
}

/// `F(u, t_j)`: the stage integrals at `t_j` fed through the outer map.
pub fn eval_f(p: &VolterraProblem, tr: &Trajectory, weights: &WeightTable, j: usize) -> Result<Vec<f64>> {
    check_shapes(p, tr, weights)?;
    eval_f_unchecked(p, tr, weights, j)
}

fn eval_f_unchecked(p: &VolterraProblem, tr: &Trajectory, weights: &WeightTable, j: usize) -> Result<Vec<f64>> {
    let t = tr.mesh().nodes()[j];
    let omegas = p
        .stages
        .iter()
        .map(|s| nested_integral(s, weights, tr, j))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::at_node(j, e))?;
    let w: Vec<&[f64]> = omegas.iter().map(Vec::as_slice).collect();
    let mut out = vec![0.0; p.dim];
    p.outer
        .eval(&w, tr.value(j), t, &mut out)
        .map_err(|e| Error::at_node(j, e))?;
    Ok(out)
}

fn check_shapes(p: &VolterraProblem, tr: &Trajectory, weights: &WeightTable) -> Result<()> {
    if tr.dim() != p.dim {
        return Err(Error::Precondition(format!(
            "trajectory dimension {} differs from problem dimension {}",
            tr.dim(),
            p.dim
        )));
    }
    if weights.len() != tr.mesh().len() {
        return Err(Error::Precondition("weight table does not match the mesh".into()));
    }
    Ok(())
}

/// `F(u, t_j)` for every node. Nodes are evaluated in parallel; each node's
/// arithmetic is independent of scheduling, so results are bit-identical.
pub fn eval_f_all(p: &VolterraProblem, tr: &Trajectory, weights: &WeightTable) -> Result<Vec<Vec<f64>>> {
    check_shapes(p, tr, weights)?;
    (0..tr.mesh().len())
        .into_par_iter()
        .map(|j| eval_f_unchecked(p, tr, weights, j))
        .collect()
}

/// `L(u) = u − A⁻¹F(u, ·)` node by node. The input is left unchanged.
pub fn eval_l(p: &VolterraProblem, tr: &Trajectory, weights: &WeightTable) -> Result<Trajectory> {
    let f = eval_f_all(p, tr, weights)?;
    let mut values = Vec::with_capacity(tr.values().len());
    let mut x = vec![0.0; p.dim];
    for (j, fj) in f.iter().enumerate() {
        p.operator.solve(fj, &mut x).map_err(|e| Error::at_node(j, e))?;
        values.extend(tr.value(j).iter().zip(&x).map(|(u, d)| u - d));
    }
    Trajectory::from_values(tr.mesh_arc().clone(), p.dim, values)
}
