//! Safeguarded Newton iteration for strictly decreasing scalar functions.

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 300;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Finds the root of a strictly decreasing `f` on `[lo, hi]`.
///
/// `f` returns `(value, derivative)`, or `None` where the value overflows;
/// overflow only happens to the right of the root, so it shrinks `hi`.
/// Requires `f(lo) >= 0 >= f(hi)`. Newton steps are taken when they stay
/// inside the bracket and shrink it fast enough, bisection otherwise.
pub fn decreasing_root<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<Root>
where
    F: Fn(f64) -> Option<(f64, f64)>,
{
    let mut x = 0.5 * (lo + hi);
    let mut step_old = hi - lo;
    let mut step = step_old;
    let mut best = (x, f64::INFINITY);

    for it in 0..MAX_ITERATIONS {
        let Some((fx, dfx)) = f(x) else {
            hi = x;
            x = 0.5 * (lo + hi);
            continue;
        };
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= tol {
            return Ok(Root {
                x,
                residual: fx,
                iterations: it + 1,
            });
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // bracket exhausted at floating-point resolution
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(f64::MIN_POSITIVE) {
            return Ok(Root {
                x: best.0,
                residual: best.1,
                iterations: it + 1,
            });
        }
        let newton = if dfx < 0.0 { x - fx / dfx } else { f64::NAN };
        let slow = (2.0 * fx).abs() > (step_old * dfx).abs();
        step_old = step;
        if newton > lo && newton < hi && !slow {
            step = newton - x;
            x = newton;
        } else {
            step = 0.5 * (hi - lo);
            x = lo + step;
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        lo,
        hi,
        residual: best.1,
    })
}
