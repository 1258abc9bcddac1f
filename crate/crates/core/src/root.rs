//! Bracketed bisection for the scalar first-order conditions.
//!
//! Every FOC in this crate has the form `p'(x) * m = 1` where `p'` falls
//! strictly from `+inf` at zero towards zero, so a bracket always exists once
//! the multiplier `m` is positive and finite.

use crate::error::{Error, Result};
use crate::technology::Technology;

const BRACKET_STEPS: usize = 4096;
const BISECTION_STEPS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Marginal {
    pub x: f64,
    pub iterations: usize,
}

/// Unique `x >= 0` with `p'(x) * m = 1`; `x = 0` when `m <= 0` or when the
/// root is below the smallest positive double.
pub fn solve_marginal(tech: &Technology, m: f64, growth: f64) -> Result<Marginal> {
    if !(m > 0.0) {
        return Ok(Marginal { x: 0.0, iterations: 0 });
    }
    if !m.is_finite() || !(growth > 1.0) {
        return Err(Error::Convergence {
            context: format!("bracketing p'(x)*{m} = 1"),
            iterations: 0,
            residual: f64::INFINITY,
            partial: vec![],
        });
    }
    // g > 0 left of the root.
    let g = |x: f64| tech.slope(x) * m - 1.0;
    let mut steps = 0;
    let (mut lo, mut hi);
    if g(1.0) > 0.0 {
        lo = 1.0;
        hi = growth;
        while g(hi) > 0.0 {
            lo = hi;
            hi *= growth;
            steps += 1;
            if steps > BRACKET_STEPS || !hi.is_finite() {
                return Err(Error::Convergence {
                    context: format!("bracketing p'(x)*{m} = 1 from above"),
                    iterations: steps,
                    residual: g(lo),
                    partial: vec![lo],
                });
            }
        }
    } else {
        hi = 1.0;
        lo = 1.0 / growth;
        while g(lo) <= 0.0 {
            hi = lo;
            lo /= growth;
            steps += 1;
            if lo == 0.0 || steps > BRACKET_STEPS {
                return Ok(Marginal {
                    x: 0.0,
                    iterations: steps,
                });
            }
        }
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        steps += 1;
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = if g(lo).abs() < g(hi).abs() { lo } else { hi };
    Ok(Marginal { x, iterations: steps })
}

/// `1 - p'(x) m`, the first-order residual. Corners (`m = 0`, or a root
/// below the representable range) count as satisfied.
pub fn foc_residual(tech: &Technology, x: f64, m: f64) -> f64 {
    if x > 0.0 {
        return 1.0 - tech.slope(x) * m;
    }
    if !(m > 0.0) || tech.slope(f64::MIN_POSITIVE * f64::EPSILON) * m <= 1.0 {
        return 0.0;
    }
    f64::NEG_INFINITY
}
