//! Scalar root finding and numerical differentiation.

use crate::error::{Error, Result};

/// Safeguarded Newton on a bracket `[lo, hi]` with `f(lo) ≤ 0 ≤ f(hi)`
/// (increasing `f`). Newton steps that leave the bracket or fail to halve
/// it fall back to bisection. `fdf` returns `(f(x), f'(x))`.
pub fn newton_bisect<F>(fdf: F, mut lo: f64, mut hi: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let (flo, _) = fdf(lo)?;
    let (fhi, _) = fdf(hi)?;
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::Precondition(format!(
            "root not bracketed: f({lo}) = {flo}, f({hi}) = {fhi}"
        )));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    let mut x = 0.5 * (lo + hi);
    let mut width = hi - lo;
    for _ in 0..max_iter {
        let (fx, dfx) = fdf(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx > 0.0 && newton > lo && newton < hi && (newton - x).abs() < 0.5 * width {
            newton
        } else {
            0.5 * (lo + hi)
        };
        width = (next - x).abs();
        x = next;
        if width <= xtol * (1.0 + x.abs()) || hi - lo <= xtol * (1.0 + x.abs()) {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Bisection on a predicate that holds at `lo` and fails at `hi`. Returns the
/// final bracket.
pub fn bisect_predicate<P>(mut pred: P, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<(f64, f64)>
where
    P: FnMut(f64) -> Result<bool>,
{
    for _ in 0..200 {
        if hi - lo <= rel_tol * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Derivative by Ridders' extrapolation of central differences, starting at
/// step `h0` and shrinking by 1.4 per column. Returns (estimate, error).
pub fn ridders_derivative<F>(f: F, x: f64, h0: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    const NTAB: usize = 10;
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    let mut a = [[0.0f64; NTAB]; NTAB];
    let mut h = h0;
    a[0][0] = (f(x + h)? - f(x - h)?) / (2.0 * h);
    let mut best = a[0][0];
    let mut err = f64::INFINITY;
    for i in 1..NTAB {
        h /= CON;
        a[0][i] = (f(x + h)? - f(x - h)?) / (2.0 * h);
        let mut fac = CON2;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let e = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    Ok((best, err))
}

/// Plain central difference with step `h`.
pub fn central_difference<F>(f: F, x: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_bisect_sqrt2() {
        let r = newton_bisect(|x| Ok((x * x - 2.0, 2.0 * x)), 0.0, 2.0, 1e-15, 100).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn newton_bisect_requires_bracket() {
        assert!(newton_bisect(|x| Ok((x - 5.0, 1.0)), 0.0, 2.0, 1e-12, 50).is_err());
    }

    #[test]
    fn predicate_bisection() {
        let (lo, hi) = bisect_predicate(|x| Ok(x * x < 2.0), 0.0, 2.0, 1e-14).unwrap();
        assert!(lo <= 2f64.sqrt() && hi >= 2f64.sqrt() && hi - lo < 1e-13);
    }

    #[test]
    fn ridders_accuracy() {
        let (d, _) = ridders_derivative(|x: f64| Ok(x.exp()), 1.0, 0.1).unwrap();
        assert!((d - 1f64.exp()).abs() < 1e-12);
        let (d, _) = ridders_derivative(|x: f64| Ok(0.5 * x * x + 0.5), 1.0, 0.1).unwrap();
        assert!((d - 1.0).abs() < 1e-13);
    }
}
