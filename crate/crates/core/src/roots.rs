//! Bracketed scalar root finding: secant steps inside a bisection bracket.

use crate::error::{Error, Result};

/// Finds the root of an increasing function `f` on `[lo, hi]`.
///
/// Secant steps are taken while they land inside the bracket and the
/// bracket keeps shrinking by at least half every two steps; otherwise the
/// step falls back to bisection, so termination is guaranteed.
pub(crate) fn increasing_root<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    f_tol: f64,
    max_iter: usize,
    what: &'static str,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Domain(format!(
            "{what}: objective is NaN on the bracket"
        )));
    }
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::Domain(format!(
            "{what}: target outside the representable range [{lo}, {hi}]"
        )));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }

    let (mut x0, mut f0) = (lo, f_lo);
    let (mut x1, mut f1) = (hi, f_hi);
    let mut width_two_back = f64::INFINITY;
    let mut width_one_back = hi - lo;

    for _ in 0..max_iter {
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) {
            return Ok(if f_lo.abs() < f_hi.abs() { lo } else { hi });
        }

        let force_bisect = width > 0.5 * width_two_back;
        let secant = if f1 != f0 {
            x1 - f1 * (x1 - x0) / (f1 - f0)
        } else {
            f64::NAN
        };
        let x = if !force_bisect && secant > lo && secant < hi {
            secant
        } else {
            0.5 * (lo + hi)
        };

        let fx = f(x);
        if fx.is_nan() {
            return Err(Error::Domain(format!("{what}: objective is NaN at {x}")));
        }
        if fx.abs() <= f_tol {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        width_two_back = width_one_back;
        width_one_back = width;
        x0 = x1;
        f0 = f1;
        x1 = x;
        f1 = fx;
    }
    Err(Error::IterationLimit { what, max_iter })
}
