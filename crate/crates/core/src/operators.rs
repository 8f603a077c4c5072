//! Linear operators `A` with a solve-against-`A` capability.

use std::fmt::Debug;

use crate::error::{Error, Result};

pub trait LinearOperator: Debug + Send + Sync {
    fn dim(&self) -> usize;

    /// `out = A x`
    fn apply(&self, x: &[f64], out: &mut [f64]);

    /// `A out = rhs`
    fn solve(&self, rhs: &[f64], out: &mut [f64]) -> Result<()>;
}

/// `A = a·I` on `ℝ^dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    dim: usize,
    a: f64,
}

impl Scaled {
    pub fn new(dim: usize, a: f64) -> Self {
        Self { dim, a }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(dim, 1.0)
    }
}

impl LinearOperator for Scaled {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = self.a * v;
        }
    }

    fn solve(&self, rhs: &[f64], out: &mut [f64]) -> Result<()> {
        if self.a == 0.0 {
            return Err(Error::Singular("zero scalar operator".into()));
        }
        for (o, v) in out.iter_mut().zip(rhs) {
            *o = v / self.a;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseMethod {
    /// Thomas algorithm on the tridiagonal matrix.
    Tridiagonal,
    /// Quadrature against the Green's function of `u'' = f`, `u(0) = u(1) = 0`.
    Green,
}

/// Second-difference approximation of `d²/dx²` on `m` interior nodes of
/// `[0, 1]` with homogeneous Dirichlet boundary values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondDifference {
    m: usize,
    h: f64,
    method: InverseMethod,
}

/// Green's function of `u'' = f` on `[0, 1]` with zero boundary values.
pub fn green(x: f64, s: f64) -> f64 {
    if x <= s {
        x * (s - 1.0)
    } else {
        s * (x - 1.0)
    }
}

impl SecondDifference {
    pub fn new(m: usize, method: InverseMethod) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidSpec(format!("need at least 3 interior nodes, got {m}")));
        }
        Ok(Self {
            m,
            h: 1.0 / (m + 1) as f64,
            method,
        })
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn method(&self) -> InverseMethod {
        self.method
    }

    /// Interior node `x_i = (i + 1) h`.
    pub fn node(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.h
    }

    pub fn with_method(self, method: InverseMethod) -> Self {
        Self { method, ..self }
    }

    fn solve_thomas(&self, rhs: &[f64], out: &mut [f64]) -> Result<()> {
        // (u_{i-1} - 2u_i + u_{i+1}) / h² = rhs_i, scaled to (1, -2, 1) = h² rhs
        let m = self.m;
        let h2 = self.h * self.h;
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        let mut b = -2.0;
        c[0] = 1.0 / b;
        d[0] = h2 * rhs[0] / b;
        for i in 1..m {
            b = -2.0 - c[i - 1];
            if b == 0.0 {
                return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
            }
            c[i] = 1.0 / b;
            d[i] = (h2 * rhs[i] - d[i - 1]) / b;
        }
        out[m - 1] = d[m - 1];
        for i in (0..m - 1).rev() {
            out[i] = d[i] - c[i] * out[i + 1];
        }
        Ok(())
    }

    fn solve_green(&self, rhs: &[f64], out: &mut [f64]) {
        // trapezoid in s; G vanishes at s = 0 and s = 1
        for (i, o) in out.iter_mut().enumerate() {
            let x = self.node(i);
            *o = self.h * rhs.iter().enumerate().map(|(k, f)| green(x, self.node(k)) * f).sum::<f64>();
        }
    }

    /// Max-abs row sum of the discrete inverse, a bound on `‖A⁻¹‖`.
    pub fn inverse_norm_bound(&self) -> f64 {
        (0..self.m)
            .map(|i| {
                let x = self.node(i);
                (0..self.m).map(|k| self.h * green(x, self.node(k)).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Discrete first derivative on the `m + 1` cells, including boundary zeros.
    pub fn first_differences(&self, u: &[f64]) -> Vec<f64> {
        let padded = self.padded(u);
        padded.windows(2).map(|w| (w[1] - w[0]) / self.h).collect()
    }

    /// Discrete second derivative at the interior nodes.
    pub fn second_differences(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        self.apply(u, &mut out);
        out
    }

    fn padded(&self, u: &[f64]) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.m + 2);
        p.push(0.0);
        p.extend_from_slice(u);
        p.push(0.0);
        p
    }
}

impl LinearOperator for SecondDifference {
    fn dim(&self) -> usize {
        self.m
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let h2 = self.h * self.h;
        for i in 0..self.m {
            let left = if i == 0 { 0.0 } else { x[i - 1] };
            let right = if i + 1 == self.m { 0.0 } else { x[i + 1] };
            out[i] = (left - 2.0 * x[i] + right) / h2;
        }
    }

    fn solve(&self, rhs: &[f64], out: &mut [f64]) -> Result<()> {
        match self.method {
            InverseMethod::Tridiagonal => self.solve_thomas(rhs, out),
            InverseMethod::Green => {
                self.solve_green(rhs, out);
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn green_inverse_of_constant() {
        for method in [InverseMethod::Tridiagonal, InverseMethod::Green] {
            let a = SecondDifference::new(21, method).unwrap();
            let mut u = vec![0.0; 21];
            a.solve(&[1.0; 21], &mut u).unwrap();
            for (i, v) in u.iter().enumerate() {
                let x = a.node(i);
                assert!((v - x * (x - 1.0) / 2.0).abs() < 1e-14, "{method:?} node {i}");
            }
            let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!((peak - 0.125).abs() < 1e-14);
        }
    }

    #[test]
    fn green_inverse_of_sine_mode() {
        let m = 63;
        let a = SecondDifference::new(m, InverseMethod::Green).unwrap();
        let rhs: Vec<f64> = (0..m).map(|i| (PI * a.node(i)).sin()).collect();
        let mut u = vec![0.0; m];
        a.solve(&rhs, &mut u).unwrap();
        let h = a.step();
        for (i, v) in u.iter().enumerate() {
            let exact = -(PI * a.node(i)).sin() / (PI * PI);
            assert!((v - exact).abs() < 0.1 * h * h, "node {i}");
        }
    }

    #[test]
    fn green_inverse_of_zero() {
        let a = SecondDifference::new(5, InverseMethod::Green).unwrap();
        let mut u = vec![1.0; 5];
        a.solve(&[0.0; 5], &mut u).unwrap();
        assert_eq!(u, vec![0.0; 5]);
    }

    #[test]
    fn solve_inverts_apply() {
        let a = SecondDifference::new(9, InverseMethod::Tridiagonal).unwrap();
        let x: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut ax = vec![0.0; 9];
        a.apply(&x, &mut ax);
        let mut back = vec![0.0; 9];
        a.solve(&ax, &mut back).unwrap();
        for (p, q) in x.iter().zip(&back) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_norm_is_one_eighth_scale() {
        let a = SecondDifference::new(21, InverseMethod::Green).unwrap();
        let c = a.inverse_norm_bound();
        assert!(c <= 0.125 + 1e-12 && c > 0.12, "{c}");
    }

    #[test]
    fn too_few_nodes() {
        assert!(SecondDifference::new(2, InverseMethod::Green).is_err());
    }

    #[test]
    fn differences_include_boundary() {
        let a = SecondDifference::new(3, InverseMethod::Green).unwrap();
        let d = a.first_differences(&[1.0, 1.0, 1.0]);
        assert_eq!(d, vec![4.0, 0.0, 0.0, -4.0]);
    }
}
