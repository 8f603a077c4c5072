//! Scalar maps of a fixed number of real arguments, backed either by a parsed
//! expression or by a Rust closure.

use std::fmt;
use std::sync::Arc;

use crate::expr::{self, Expr, ExprError};

type Callback<const N: usize> = dyn Fn([f64; N]) -> Result<f64, ExprError> + Send + Sync;

#[derive(Clone)]
pub struct ScalarFn<const N: usize> {
    call: Arc<Callback<N>>,
    label: String,
    /// `uses[i]` is false when the map provably ignores argument `i`.
    uses: [bool; N],
}

impl<const N: usize> ScalarFn<N> {
    /// Wraps a closure. Non-finite results are reported as domain errors.
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn([f64; N]) -> f64 + Send + Sync + 'static,
    {
        Self {
            call: Arc::new(move |args| {
                let v = f(args);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(ExprError::Domain {
                        op: "closure",
                        offset: None,
                    })
                }
            }),
            label: label.into(),
            uses: [true; N],
        }
    }

    pub fn from_expr(expr: Expr, vars: [&str; N]) -> Self {
        let label = expr.to_string();
        let uses = vars.map(|v| expr.uses(v));
        Self {
            call: Arc::new(move |args| expr.eval_slots(&args)),
            label,
            uses,
        }
    }

    /// Parses `text` with `vars` as the argument names, in order.
    pub fn parse(text: &str, vars: [&str; N]) -> Result<Self, ExprError> {
        let e = expr::parse(text, &vars)?;
        Ok(Self::from_expr(e, vars))
    }

    /// Marks argument `index` as unused by the map.
    pub fn ignoring(mut self, index: usize) -> Self {
        self.uses[index] = false;
        self
    }

    pub fn uses_arg(&self, index: usize) -> bool {
        self.uses[index]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn call(&self, args: [f64; N]) -> Result<f64, ExprError> {
        (self.call)(args)
    }
}

impl<const N: usize> fmt::Debug for ScalarFn<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFn({})", self.label)
    }
}

impl ScalarFn<1> {
    pub fn eval(&self, x: f64) -> Result<f64, ExprError> {
        self.call([x])
    }
}

impl ScalarFn<2> {
    pub fn eval(&self, x: f64, y: f64) -> Result<f64, ExprError> {
        self.call([x, y])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_backed() {
        let f = ScalarFn::parse("w + t", ["t", "w"]).unwrap();
        assert_eq!(f.eval(1.0, 2.0).unwrap(), 3.0);
        assert!(f.uses_arg(0) && f.uses_arg(1));
        let g = ScalarFn::parse("w^2", ["t", "w"]).unwrap();
        assert!(!g.uses_arg(0));
    }

    #[test]
    fn closure_non_finite_is_domain_error() {
        let g = ScalarFn::new("1/(1-z)", |[z]: [f64; 1]| 1.0 / (1.0 - z));
        assert!(g.eval(0.5).is_ok());
        assert!(matches!(g.eval(1.0), Err(ExprError::Domain { .. })));
    }
}
