//! The universal constant δ and the closed-form height bounds.
//!
//! Notation used throughout:
//!
//! - `n`: ambient dimension of the base (the graph lives in ℝⁿ × ℝ).
//! - `h_inf_abs`: `|H_inf|`, the absolute value of the infimum of the boundary
//!   mean curvature taken with respect to the normal pointing into Ω.
//! - `mu = (n − 1)·|H_inf|`.
//! - `reach`: the tubular-neighbourhood width `R` of the boundary.
//! - `radius_bound`: radius of a ball containing Ω (called 𝕽 in the docs).

use std::sync::OnceLock;

use serde::Serialize;

use crate::barriers::spherical_cap_height;
use crate::{Error, Result};

/// Interval on which `x − cosh(x / sqrt(x² − 1))` changes sign exactly once.
pub const DELTA_BRACKET: (f64, f64) = (1.5, 2.5);

/// Arguments of `acosh` that fall below 1 by at most this much are rounding
/// noise and get clamped to 1.
pub const ACOSH_CLAMP: f64 = 1e-15;

const DELTA_BISECTION_WIDTH: f64 = 1e-13;

/// The root δ > 1 of `x = cosh(x / sqrt(x² − 1))`, with its fixed-point defect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaConstant {
    pub value: f64,
    /// `|δ − cosh(δ / sqrt(δ² − 1))|`
    pub residual: f64,
}

/// `acosh(1 + x)` for `x ≥ 0`, accurate for small `x`.
///
/// Arguments in `[-ACOSH_CLAMP, 0)` are treated as zero; anything smaller is
/// outside the domain and yields NaN.
pub fn acosh1p(x: f64) -> f64 {
    let x = if (-ACOSH_CLAMP..0.0).contains(&x) { 0.0 } else { x };
    if x < 0.0 {
        return f64::NAN;
    }
    (x + (x * (2.0 + x)).sqrt()).ln_1p()
}

/// `acosh(x) = ln(x + sqrt(x² − 1))` with the same clamp as [`acosh1p`].
pub fn acosh(x: f64) -> f64 {
    acosh1p(x - 1.0)
}

fn delta_defect(x: f64) -> f64 {
    x - (x / ((x - 1.0) * (x + 1.0)).sqrt()).cosh()
}

fn delta_defect_derivative(x: f64) -> f64 {
    let s = (x - 1.0) * (x + 1.0);
    let y = x / s.sqrt();
    1.0 + y.sinh() / (s * s.sqrt())
}

/// Bisection on [`DELTA_BRACKET`] followed by one guarded Newton polish.
pub fn solve_delta() -> DeltaConstant {
    let (mut lo, mut hi) = DELTA_BRACKET;
    assert!(
        delta_defect(lo) < 0.0 && delta_defect(hi) > 0.0,
        "δ bracket does not straddle the root"
    );
    while hi - lo > DELTA_BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if delta_defect(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let fx = delta_defect(x);
    let polished = x - fx / delta_defect_derivative(x);
    if (lo..=hi).contains(&polished) && delta_defect(polished).abs() <= fx.abs() {
        x = polished;
    }
    DeltaConstant {
        value: x,
        residual: delta_defect(x).abs(),
    }
}

/// Cached value of δ ≈ 1.8102.
pub fn delta() -> f64 {
    static DELTA: OnceLock<f64> = OnceLock::new();
    *DELTA.get_or_init(|| solve_delta().value)
}

/// `acosh(λ)/λ`; maximised over λ > 1 exactly at δ.
pub fn height_profile(lambda: f64) -> f64 {
    acosh(lambda) / lambda
}

/// Derivative of [`height_profile`].
pub fn height_profile_derivative(lambda: f64) -> f64 {
    let s = ((lambda - 1.0) * (lambda + 1.0)).sqrt();
    (lambda / s - acosh(lambda)) / (lambda * lambda)
}

/// Which side of a `min{reach, ·}` was active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinBranch {
    Reach,
    Curvature,
}

fn min_with_reach(reach: f64, curvature_limited: f64) -> (f64, MinBranch) {
    if reach <= curvature_limited {
        (reach, MinBranch::Reach)
    } else {
        (curvature_limited, MinBranch::Curvature)
    }
}

pub(crate) fn check_dimension(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension n = {n} must be at least 2")));
    }
    Ok(())
}

pub(crate) fn check_positive(name: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::InvalidParameter(format!("{name} = {value} must be positive and finite")));
    }
    Ok(())
}

pub(crate) fn check_nonnegative(name: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value >= 0.0) {
        return Err(Error::InvalidParameter(format!("{name} = {value} must be non-negative and finite")));
    }
    Ok(())
}

/// Height bound for the minimal (H = 0) case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimalBound {
    pub tau: f64,
    pub tau_branch: MinBranch,
    /// Supremum of admissible heights. Infinite when `degenerate`.
    pub h_max: f64,
    /// Set when `|H_inf| = 0`; the bound then diverges.
    pub degenerate: bool,
}

/// `τ = min{R, (δ−1)/(δ(n−1)|H_inf|)}` and
/// `h_max = acosh(1 + τδ(n−1)|H_inf|) / (δ(n−1)|H_inf|)`.
///
/// For `|H_inf| = 0` the expression behaves like `sqrt(2R/m)` as `m → 0`, so
/// the bound is reported as `+∞` with `degenerate = true` and `τ = R`.
pub fn minimal_height_bound(n: usize, h_inf_abs: f64, reach: f64) -> Result<MinimalBound> {
    check_dimension(n)?;
    check_nonnegative("|H_inf|", h_inf_abs)?;
    check_positive("reach", reach)?;
    if h_inf_abs == 0.0 {
        return Ok(MinimalBound {
            tau: reach,
            tau_branch: MinBranch::Reach,
            h_max: f64::INFINITY,
            degenerate: true,
        });
    }
    let d = delta();
    let slope = d * (n - 1) as f64 * h_inf_abs;
    let (tau, tau_branch) = min_with_reach(reach, (d - 1.0) / slope);
    Ok(MinimalBound {
        tau,
        tau_branch,
        h_max: acosh1p(tau * slope) / slope,
        degenerate: false,
    })
}

/// The CMC admissibility constant `C` and the width `σ` it is built on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CmcConstant {
    pub sigma: f64,
    pub sigma_branch: MinBranch,
    pub c: f64,
}

/// `σ = min{R, 𝕽(δ−1)/(δ[𝕽μ + n(δ+1)])}`.
pub fn cmc_sigma(n: usize, mu: f64, radius_bound: f64, reach: f64) -> (f64, MinBranch) {
    let d = delta();
    let nf = n as f64;
    min_with_reach(
        reach,
        radius_bound * (d - 1.0) / (d * (radius_bound * mu + nf * (d + 1.0))),
    )
}

/// Evaluates `C` term by term:
///
/// ```text
///            2δμ·A₀
/// C = ───────────────────────────────────────────────────────────────
///     A₁² + μδ²𝕽[μ𝕽 + 2n(1+δ)] + δn(1+δ)[δn(1+δ) − 2A₀]
///
/// A₀ = acosh(1 + δμσ),   A₁ = acosh(1 + δ[μ + (n/𝕽)(1+δ)]σ)
/// ```
///
/// `μ = 0` is reported as [`Error::Degenerate`]: the numerator vanishes and
/// no positive mean curvature is admissible.
pub fn cmc_constant_c(n: usize, mu: f64, radius_bound: f64, reach: f64) -> Result<CmcConstant> {
    check_dimension(n)?;
    check_nonnegative("mu", mu)?;
    check_positive("radius bound", radius_bound)?;
    check_positive("reach", reach)?;
    if mu == 0.0 {
        return Err(Error::Degenerate(
            "mu = 0 makes C vanish; no H > 0 is admissible".into(),
        ));
    }
    let d = delta();
    let nf = n as f64;
    let (sigma, sigma_branch) = cmc_sigma(n, mu, radius_bound, reach);
    let a0 = acosh1p(d * mu * sigma);
    let a1 = acosh1p(d * (mu + nf / radius_bound * (1.0 + d)) * sigma);
    let q = d * nf * (1.0 + d);
    let numerator = 2.0 * d * mu * a0;
    let denominator = a1 * a1
        + mu * d * d * radius_bound * (mu * radius_bound + 2.0 * nf * (1.0 + d))
        + q * (q - 2.0 * a0);
    Ok(CmcConstant {
        sigma,
        sigma_branch,
        c: numerator / denominator,
    })
}

/// `h_H`, the admissible height for mean curvature `H ∈ [0, C)`.
///
/// ```text
/// h_H = acosh(1 + δKσ)/(δK) − H𝕽²/(1 + sqrt(1 − H²𝕽²)),   K = μ + nH(1+δ)
/// ```
pub fn cmc_height_bound(
    n: usize,
    mu: f64,
    h: f64,
    radius_bound: f64,
    reach: f64,
) -> Result<f64> {
    check_nonnegative("H", h)?;
    let cc = cmc_constant_c(n, mu, radius_bound, reach)?;
    if h >= cc.c {
        return Err(Error::CurvatureOutOfRange { h, c: cc.c });
    }
    let d = delta();
    let k = mu + n as f64 * h * (1.0 + d);
    let barrier = acosh1p(d * k * cc.sigma) / (d * k);
    Ok(barrier - spherical_cap_height(h, radius_bound)?)
}

/// `ρ = min{R, (δ−1)/(δ[μ + nH(1+δ)])}`, the barrier width in the limit
/// `α → 1, λ → δ`.
pub fn rho(n: usize, mu: f64, h: f64, reach: f64) -> (f64, MinBranch) {
    let d = delta();
    let k = mu + n as f64 * h * (1.0 + d);
    if k == 0.0 {
        return (reach, MinBranch::Reach);
    }
    min_with_reach(reach, (d - 1.0) / (d * k))
}

/// `lim ψ_{α,λ}(ε)` as `α → 1, λ → δ`:
/// `acosh(1 + δKρ)/(δK)` with `K = μ + nH(1+δ)`. Infinite when `K = 0`.
pub fn limit_barrier_height(n: usize, mu: f64, h: f64, reach: f64) -> f64 {
    let d = delta();
    let k = mu + n as f64 * h * (1.0 + d);
    if k == 0.0 {
        return f64::INFINITY;
    }
    let (rho, _) = rho(n, mu, h, reach);
    acosh1p(d * k * rho) / (d * k)
}

/// `acosh(δ)/(δ(μ + 2nH))`, the strict upper bound on every `ψ_{α,λ}(ε)`.
pub fn barrier_height_supremum(n: usize, mu: f64, h: f64) -> f64 {
    let d = delta();
    acosh(d) / (d * (mu + 2.0 * n as f64 * h))
}

/// Which side of `ε̄ = min{r′, 1/(2B)}` was active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArsBranch {
    InjectivityRadius,
    Curvature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArsBound {
    pub b: f64,
    pub eps_bar: f64,
    pub eps_branch: ArsBranch,
    pub bound: f64,
}

/// Height bound of the injectivity-radius type: `B⁻¹ ln(1 + B ε̄)` with
/// `B = 6(1+r′)(n−1)|H_inf|` and `ε̄ = min{r′, 1/(2B)}`.
pub fn ars_comparison_bound(n: usize, h_inf_abs: f64, r_prime: f64) -> Result<ArsBound> {
    check_dimension(n)?;
    check_positive("|H_inf|", h_inf_abs)?;
    check_positive("r'", r_prime)?;
    let b = 6.0 * (1.0 + r_prime) * (n - 1) as f64 * h_inf_abs;
    let half_inverse = 1.0 / (2.0 * b);
    let (eps_bar, eps_branch) = if r_prime <= half_inverse {
        (r_prime, ArsBranch::InjectivityRadius)
    } else {
        (half_inverse, ArsBranch::Curvature)
    };
    Ok(ArsBound {
        b,
        eps_bar,
        eps_branch,
        bound: (b * eps_bar).ln_1p() / b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bisection_oracle() -> f64 {
        let g = |x: f64| x - (x / (x * x - 1.0).sqrt()).cosh();
        let (mut a, mut b) = (1.5_f64, 2.5_f64);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(a) * g(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn delta_matches_stated_value_and_is_a_fixed_point() {
        let d = solve_delta();
        assert!((d.value - 1.8102).abs() < 1e-3, "δ = {}", d.value);
        assert!(d.value > 1.8 && d.value < 1.82);
        assert!(d.residual <= 1e-12, "residual {}", d.residual);
    }

    #[test]
    fn delta_is_stationary_point_of_height_profile() {
        let d = delta();
        assert!(height_profile_derivative(d).abs() < 1e-8);
        // and a maximum
        assert!(height_profile(d) > height_profile(d - 1e-3));
        assert!(height_profile(d) > height_profile(d + 1e-3));
    }

    #[test]
    fn delta_agrees_with_plain_bisection() {
        assert!((delta() - bisection_oracle()).abs() < 1e-10);
    }

    #[test]
    fn acosh_clamps_rounding_below_one() {
        assert_eq!(acosh(1.0 - 5e-16), 0.0);
        assert!(acosh(1.0 - 1e-10).is_nan());
        assert_relative_eq!(acosh(2.0), 2.0_f64.acosh(), max_relative = 1e-15);
        assert_relative_eq!(acosh1p(1e-12), (2e-12_f64).sqrt() * (1.0 - 1e-12 / 12.0), max_relative = 1e-12);
    }

    #[test]
    fn minimal_bound_curvature_branch() {
        let d = bisection_oracle();
        let b = minimal_height_bound(2, 1.0, 10.0).unwrap();
        assert_eq!(b.tau_branch, MinBranch::Curvature);
        assert_relative_eq!(b.tau, (d - 1.0) / d, max_relative = 1e-12);
        assert_relative_eq!(b.h_max, d.acosh() / d, max_relative = 1e-12);
        assert!((b.h_max - 0.6627).abs() < 1e-4);
    }

    #[test]
    fn minimal_bound_reach_branch() {
        let d = bisection_oracle();
        let b = minimal_height_bound(2, 1.0, 0.1).unwrap();
        assert_eq!(b.tau_branch, MinBranch::Reach);
        assert_eq!(b.tau, 0.1);
        assert_relative_eq!(b.h_max, (1.0 + 0.1 * d).acosh() / d, max_relative = 1e-12);
    }

    #[test]
    fn minimal_bound_grows_without_limit_as_curvature_vanishes() {
        // acosh(1 + Rm)/m ~ sqrt(2R/m): passes the reach and keeps growing.
        let reach = 0.7;
        let mut previous = 0.0;
        for k in 1..12 {
            let h = 10f64.powi(-k);
            let b = minimal_height_bound(2, h, reach).unwrap();
            assert!(b.h_max > previous);
            let m = delta() * h;
            assert_relative_eq!(b.h_max, (2.0 * reach / m).sqrt(), max_relative = 0.5 * reach * m + 1e-6);
            previous = b.h_max;
        }
        assert!(previous > reach);
        let degenerate = minimal_height_bound(2, 0.0, reach).unwrap();
        assert!(degenerate.degenerate);
        assert_eq!(degenerate.tau, reach);
        assert!(degenerate.h_max.is_infinite());
    }

    #[test]
    fn minimal_bound_monotonicity() {
        let reaches = [0.05, 0.1, 0.3, 0.5, 1.0, 3.0];
        let curvatures = [0.1, 0.5, 1.0, 2.0, 5.0];
        for n in 2..6 {
            for &k in &curvatures {
                let hs: Vec<f64> = reaches
                    .iter()
                    .map(|&r| minimal_height_bound(n, k, r).unwrap().h_max)
                    .collect();
                assert!(hs.windows(2).all(|w| w[0] <= w[1]), "reach monotonicity {hs:?}");
            }
            for &r in &reaches {
                let hs: Vec<f64> = curvatures
                    .iter()
                    .map(|&k| minimal_height_bound(n, k, r).unwrap().h_max)
                    .collect();
                assert!(hs.windows(2).all(|w| w[0] >= w[1]));
                let a = minimal_height_bound(n, 1.0, r).unwrap().h_max;
                let b = minimal_height_bound(n + 1, 1.0, r).unwrap().h_max;
                assert!(b <= a);
            }
        }
    }

    #[test]
    fn minimal_bound_rejects_bad_input() {
        assert!(minimal_height_bound(1, 1.0, 1.0).is_err());
        assert!(minimal_height_bound(2, -1.0, 1.0).is_err());
        assert!(minimal_height_bound(2, 1.0, 0.0).is_err());
        assert!(minimal_height_bound(2, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn positivity_margin_of_c_denominator() {
        let d = delta();
        assert!((d * (1.0 + d) - 5.087).abs() < 1e-3);
        assert!((2.0 * acosh(d) - 2.3994).abs() < 1e-3);
        for n in 2..10 {
            let nf = n as f64;
            assert!(nf * d * (1.0 + d) - 2.0 * acosh(d) >= 5.087 - 2.3994);
        }
    }

    #[test]
    fn c_lies_strictly_between_zero_and_inverse_radius() {
        let cc = cmc_constant_c(2, 1.0, 2.0, 1.0).unwrap();
        assert!(cc.c > 0.0 && cc.c < 0.5);
        // hand evaluation at these parameters
        assert!((cc.c - 0.012986).abs() < 2e-5, "C = {}", cc.c);
        assert_eq!(cc.sigma_branch, MinBranch::Curvature);
    }

    #[test]
    fn sigma_forms_agree() {
        // the 𝕽-cleared form and the (n/𝕽) form are the same number
        let d = delta();
        for &(n, mu, rb) in &[(2, 1.0, 2.0), (3, 0.2, 7.0), (5, 4.0, 0.3)] {
            let nf = n as f64;
            let (s, _) = cmc_sigma(n, mu, rb, 1e9);
            let alt = (d - 1.0) / (d * (mu + nf / rb * (d + 1.0)));
            assert_relative_eq!(s, alt, max_relative = 1e-14);
        }
    }

    #[test]
    fn c_degenerate_and_out_of_range() {
        assert!(matches!(cmc_constant_c(2, 0.0, 1.0, 1.0), Err(Error::Degenerate(_))));
        let c = cmc_constant_c(2, 1.0, 2.0, 1.0).unwrap().c;
        match cmc_height_bound(2, 1.0, c, 2.0, 1.0) {
            Err(Error::CurvatureOutOfRange { c: reported, .. }) => assert_eq!(reported, c),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cmc_height_at_zero_curvature_is_sigma_variant_of_minimal_bound() {
        let (n, mu, rb, reach) = (2, 1.0, 2.0, 1.0);
        let sigma = cmc_constant_c(n, mu, rb, reach).unwrap().sigma;
        let d = delta();
        let expected = acosh1p(d * mu * sigma) / (d * mu);
        assert_eq!(cmc_height_bound(n, mu, 0.0, rb, reach).unwrap(), expected);
    }

    #[test]
    fn cmc_height_positive_below_c() {
        let (n, mu, rb, reach) = (2, 1.0, 2.0, 1.0);
        let c = cmc_constant_c(n, mu, rb, reach).unwrap().c;
        assert!(cmc_height_bound(n, mu, 0.1 * c, rb, reach).unwrap() > 0.0);
        for k in 0..100 {
            let h = c * k as f64 / 100.0;
            assert!(cmc_height_bound(n, mu, h, rb, reach).unwrap() > 0.0);
        }
    }

    #[test]
    fn cmc_height_below_rho_form() {
        for n in 2..5 {
            for &mu in &[0.3, 1.0, 3.0] {
                for &rb in &[1.0, 2.0, 5.0] {
                    for &reach in &[0.05, 0.5, 2.0] {
                        let c = cmc_constant_c(n, mu, rb, reach).unwrap().c;
                        for k in 0..10 {
                            let h = c * k as f64 / 10.0;
                            let hh = cmc_height_bound(n, mu, h, rb, reach).unwrap();
                            let k_ = mu + n as f64 * h * (1.0 + delta());
                            let (r, _) = rho(n, mu, h, reach);
                            let upper = acosh1p(delta() * k_ * r) / (delta() * k_)
                                - spherical_cap_height(h, rb).unwrap();
                            assert!(hh <= upper + 1e-15);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ars_bound_branches() {
        let a = ars_comparison_bound(2, 1.0, 10.0).unwrap();
        assert_eq!(a.b, 66.0);
        assert_eq!(a.eps_branch, ArsBranch::Curvature);
        assert_relative_eq!(a.bound, 1.5_f64.ln() / 66.0, max_relative = 1e-14);

        let small = ars_comparison_bound(2, 1.0, 1e-3).unwrap();
        assert_eq!(small.eps_branch, ArsBranch::InjectivityRadius);
        assert_eq!(small.eps_bar, 1e-3);
        assert!(ars_comparison_bound(2, 0.0, 1.0).is_err());
        assert!(ars_comparison_bound(2, 1.0, 0.0).is_err());
    }

    #[test]
    fn limit_height_below_supremum() {
        for n in 2..5 {
            for &mu in &[0.1, 1.0, 10.0] {
                for &h in &[0.0, 0.01, 0.1] {
                    let lim = limit_barrier_height(n, mu, h, 100.0);
                    assert!(lim <= barrier_height_supremum(n, mu, h) + 1e-15);
                }
            }
        }
    }
}
