//! Adaptive Dormand-Prince 5(4) integrator for scalar ODEs `y' = F(x, y)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct OdeEnd {
    pub x: f64,
    pub y: f64,
    /// True when the stop predicate fired before reaching the target.
    pub stopped: bool,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates from `(x0, y0)` to `x1 > x0`, stopping early after the first
/// accepted step where `stop(x, y)` holds. Steps whose stages hit a domain
/// error are retried with a smaller step.
pub(crate) fn integrate<F, S>(f: &F, x0: f64, y0: f64, x1: f64, opts: OdeOptions, stop: S) -> Result<OdeEnd>
where
    F: Fn(f64, f64) -> Result<f64>,
    S: Fn(f64, f64) -> bool,
{
    let mut x = x0;
    let mut y = y0;
    if x1 <= x0 {
        return Ok(OdeEnd { x, y, stopped: false });
    }
    let span = x1 - x0;
    let mut h = (span * 1e-3).min(1e-3 * (1.0 + x0.abs()));
    let mut k = [0.0; 7];
    k[0] = f(x, y)?;
    for _ in 0..opts.max_steps {
        if x >= x1 {
            return Ok(OdeEnd { x, y, stopped: false });
        }
        let last = x + h >= x1;
        if last {
            h = x1 - x;
        }
        let trial = (|| -> Result<(f64, f64, f64)> {
            let mut stages = k;
            for s in 1..7 {
                let ys = y + h * (0..s).map(|i| A[s][i] * stages[i]).sum::<f64>();
                stages[s] = f(x + C[s] * h, ys)?;
            }
            let y_new = y + h * (0..6).map(|i| A[6][i] * stages[i]).sum::<f64>();
            let err = h * (0..7).map(|i| E[i] * stages[i]).sum::<f64>();
            let scale = opts.atol + opts.rtol * y.abs().max(y_new.abs());
            Ok((y_new, (err / scale).abs(), stages[6]))
        })();
        match trial {
            Ok((y_new, ratio, k_last)) if y_new.is_finite() && ratio <= 1.0 => {
                x = if last { x1 } else { x + h };
                y = y_new;
                k[0] = k_last;
                if stop(x, y) {
                    return Ok(OdeEnd { x, y, stopped: true });
                }
                let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
                h *= grow;
            }
            Ok((_, ratio, _)) => {
                let shrink = if ratio.is_finite() { (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
                h *= shrink;
            }
            Err(Error::Expr(_)) | Err(Error::Precondition(_)) => h *= 0.25,
            Err(e) => return Err(e),
        }
        if h <= f64::EPSILON * x.abs().max(1e-300) * 4.0 {
            return Err(Error::Inconsistent(format!("step size underflow at x = {x}, y = {y}")));
        }
    }
    Err(Error::Inconsistent(format!(
        "step budget of {} exhausted at x = {x}",
        opts.max_steps
    )))
}
