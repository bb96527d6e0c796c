//! Adaptive bisection around the double-exponential rule of `quadrature`.

use crate::{Error, Result};

const MAX_DEPTH: u32 = 40;

/// `∫_a^b f` to an absolute error of about `tol`.
///
/// The rule's own error estimate compares successive levels and can miss a
/// narrow feature entirely, so acceptance is decided by comparing the
/// whole-interval value with the sum over its two halves. Intervals that
/// disagree are split and retried with half the tolerance.
pub(crate) fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = rule(f, a, b, tol);
    integrate_at_depth(f, a, b, tol, whole, 0)
}

fn rule(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    quadrature::double_exponential::integrate(f, a, b, tol).integral
}

fn integrate_at_depth(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    whole: f64,
    depth: u32,
) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let left = rule(f, a, mid, 0.5 * tol);
    let right = rule(f, mid, b, 0.5 * tol);
    let halves = left + right;
    let diff = (halves - whole).abs();
    // rounding floor relative to the result
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if diff <= tol.max(floor) {
        return Ok(halves);
    }
    if depth >= MAX_DEPTH || mid <= a.min(b) || mid >= a.max(b) {
        return Err(Error::Quadrature { a, b, error: diff });
    }
    Ok(integrate_at_depth(f, a, mid, 0.5 * tol, left, depth + 1)?
        + integrate_at_depth(f, mid, b, 0.5 * tol, right, depth + 1)?)
}
