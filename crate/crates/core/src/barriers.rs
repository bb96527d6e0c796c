//! The supersolution family `ψ_{α,λ}` and its certification.
//!
//! For `1 < α < λ` and `H ≥ 0`,
//!
//! ```text
//! ψ(s) = [acosh(α + b s) − acosh(α)] / b,   b = λ[μ + nH(1+λ)]
//! ```
//!
//! composed with the distance `s = d(z)` to a boundary component is an upper
//! barrier on the tube `{d < ε}`, `ε = min{R, (λ−α)/b}`, whenever
//!
//! ```text
//! ψ'' + (ψ' + ψ'³)Δd + nH(1 + ψ'²)^{3/2} ≤ 0.
//! ```
//!
//! With `u = α + b s` one has `ψ' = 1/sqrt(u² − 1)` and the left-hand side
//! factors as `ψ'³·u·(nH u² + Δd·u − b)`, so its sign is that of the last
//! factor. That is what makes the constant-`Δd` certification exact.

use serde::Serialize;

use crate::constants::{acosh, check_dimension, check_nonnegative, check_positive, delta};
use crate::geometry::{boundary_geometry, circle_distance_laplacian, Component, DomainSpec};
use crate::{Error, Result};

/// `α` used when none is given: close to 1 so that `ψ(ε)` approaches its
/// supremum.
pub const DEFAULT_ALPHA: f64 = 1.0 + 1e-3;

/// A residual at or below this value counts as non-positive.
pub const CERTIFY_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_GRID_SIZE: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierParams {
    pub n: usize,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    pub mu: f64,
    pub alpha: f64,
    pub lambda: f64,
    /// `λ[μ + nH(1+λ)]`
    pub b: f64,
    /// `min{R, (λ−α)/b}`
    pub epsilon: f64,
    pub reach: f64,
}

impl BarrierParams {
    pub fn new(
        n: usize,
        mean_curvature: f64,
        mu: f64,
        alpha: f64,
        lambda: f64,
        reach: f64,
    ) -> Result<Self> {
        check_dimension(n)?;
        check_nonnegative("H", mean_curvature)?;
        check_nonnegative("mu", mu)?;
        check_positive("reach", reach)?;
        if !(alpha > 1.0 && lambda > alpha && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 1 < alpha < lambda, got alpha = {alpha}, lambda = {lambda}"
            )));
        }
        let nh = n as f64 * mean_curvature;
        let b = lambda * (mu + nh * (1.0 + lambda));
        let big_b = mu + nh;
        if !(b > big_b * alpha + nh * alpha * alpha) {
            return Err(Error::Degenerate(
                "mu = H = 0 leaves the barrier slope undefined".into(),
            ));
        }
        Ok(Self {
            n,
            mean_curvature,
            mu,
            alpha,
            lambda,
            b,
            epsilon: reach.min((lambda - alpha) / b),
            reach,
        })
    }

    /// `α = 1 + 10⁻³`, `λ = δ`.
    pub fn standard(n: usize, mean_curvature: f64, mu: f64, reach: f64) -> Result<Self> {
        Self::new(n, mean_curvature, mu, DEFAULT_ALPHA, delta(), reach)
    }

    /// `B = μ + nH`
    pub fn big_b(&self) -> f64 {
        self.mu + self.nh()
    }

    fn nh(&self) -> f64 {
        self.n as f64 * self.mean_curvature
    }

    /// `u(s) = α + b s`
    pub fn u(&self, s: f64) -> f64 {
        self.alpha + self.b * s
    }

    /// ψ without the interval check.
    pub fn psi_unchecked(&self, s: f64) -> f64 {
        (acosh(self.u(s)) - acosh(self.alpha)) / self.b
    }

    pub fn psi_prime(&self, s: f64) -> f64 {
        let u = self.u(s);
        1.0 / ((u - 1.0) * (u + 1.0)).sqrt()
    }

    pub fn psi_second(&self, s: f64) -> f64 {
        let u = self.u(s);
        -self.psi_prime(s) * self.b * u / ((u - 1.0) * (u + 1.0))
    }

    pub fn psi_at_epsilon(&self) -> f64 {
        self.psi_unchecked(self.epsilon)
    }

    /// `nH u² + Δd·u − b`; has the sign of the supersolution residual.
    pub fn residual_factor(&self, s: f64, laplacian: f64) -> f64 {
        let u = self.u(s);
        (self.nh() * u + laplacian) * u - self.b
    }

    /// The sufficient quadratic
    /// `nH b² s² + b(2nHα + B)s + Bα + nHα² − b`.
    pub fn orw_quadratic(&self, s: f64) -> f64 {
        let (nh, b, a, big_b) = (self.nh(), self.b, self.alpha, self.big_b());
        nh * b * b * s * s + b * (2.0 * nh * a + big_b) * s + big_b * a + nh * a * a - b
    }

    /// Positive root of [`Self::orw_quadratic`]. It is `(λ−α)/b` by the
    /// choice of `b`.
    pub fn orw_root(&self) -> f64 {
        let (nh, b, big_b) = (self.nh(), self.b, self.big_b());
        let u = 2.0 * b / (big_b + (big_b * big_b + 4.0 * nh * b).sqrt());
        (u - self.alpha) / b
    }

    /// First zero of the residual with `Δd ≡ μ`.
    pub fn bound_mode_root(&self) -> f64 {
        let (nh, b, mu) = (self.nh(), self.b, self.mu);
        let u = 2.0 * b / (mu + (mu * mu + 4.0 * nh * b).sqrt());
        (u - self.alpha) / b
    }
}

/// `ψ(s)` on `[0, ε]`.
pub fn psi(params: &BarrierParams, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s <= params.epsilon) {
        return Err(Error::OutsideBarrierInterval {
            s,
            epsilon: params.epsilon,
        });
    }
    Ok(params.psi_unchecked(s))
}

/// `ψ'' + (ψ' + ψ'³)Δd + nH(1 + ψ'²)^{3/2}` for an arbitrary radial profile.
pub fn supersolution_residual(
    dpsi: f64,
    d2psi: f64,
    laplacian: f64,
    n: usize,
    mean_curvature: f64,
) -> f64 {
    let p2 = dpsi * dpsi;
    d2psi + dpsi * (1.0 + p2) * laplacian + n as f64 * mean_curvature * (1.0 + p2).powf(1.5)
}

/// The supersolution residual of `ψ_{α,λ}` at `s` with the supplied `Δd`.
pub fn radial_residual(params: &BarrierParams, delta_d: impl Fn(f64) -> f64, s: f64) -> f64 {
    supersolution_residual(
        params.psi_prime(s),
        params.psi_second(s),
        delta_d(s),
        params.n,
        params.mean_curvature,
    )
}

/// Source of `Δd` during certification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianModel {
    /// Exact Laplacian of the distance to the circle.
    ExactCircle,
    /// The worst case `Δd ≡ μ`.
    CurvatureBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub grid_size: usize,
    /// The scan covers `[0, extent·ε]`; values above 1 are diagnostic.
    pub extent: f64,
    pub model: LaplacianModel,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            grid_size: DEFAULT_GRID_SIZE,
            extent: 1.0,
            model: LaplacianModel::ExactCircle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierCertificate {
    pub params: BarrierParams,
    pub component: Component,
    pub model: LaplacianModel,
    pub grid_size: usize,
    /// Largest residual over grid points in `[0, ε]`.
    pub max_residual: f64,
    pub certified: bool,
    pub psi_at_epsilon: f64,
    /// Positive root of the sufficient quadratic.
    pub orw_root: f64,
    /// Closed-form first zero of the residual (constant-`Δd` model only).
    pub closed_form_root: Option<f64>,
    /// First sign change of the residual on the scanned range, refined by
    /// bisection inside its grid bracket.
    pub first_sign_change: Option<f64>,
    pub scan_end: f64,
}

/// Certifies `ψ_{α,λ}∘d` near `component` with the exact circle `Δd`.
pub fn certify_barrier(
    params: &BarrierParams,
    domain: &DomainSpec,
    component: Component,
    grid_size: usize,
) -> Result<BarrierCertificate> {
    certify_barrier_with(
        params,
        domain,
        component,
        CertifyOptions {
            grid_size,
            ..Default::default()
        },
    )
}

pub fn certify_barrier_with(
    params: &BarrierParams,
    domain: &DomainSpec,
    component: Component,
    options: CertifyOptions,
) -> Result<BarrierCertificate> {
    if options.grid_size < 2 {
        return Err(Error::InvalidParameter("grid size must be at least 2".into()));
    }
    if !(options.extent >= 1.0 && options.extent.is_finite()) {
        return Err(Error::InvalidParameter("scan extent must be ≥ 1".into()));
    }
    let geometry = boundary_geometry(domain);
    let reach = geometry.component_reach(component)?;
    if reach < params.epsilon {
        return Err(Error::ReachTooSmall {
            epsilon: params.epsilon,
            reach,
            component: component.to_string(),
        });
    }

    let laplacian = |s: f64| -> Result<f64> {
        match options.model {
            LaplacianModel::CurvatureBound => Ok(params.mu),
            LaplacianModel::ExactCircle => circle_distance_laplacian(domain, component, s),
        }
    };

    let mut scan_end = options.extent * params.epsilon;
    if options.model == LaplacianModel::ExactCircle && component == Component::Outer {
        // the distance to the outer circle is smooth only below its radius
        scan_end = scan_end.min(domain.outer().radius * (1.0 - 1e-9));
    }
    let step = scan_end / (options.grid_size - 1) as f64;

    let mut max_residual = f64::NEG_INFINITY;
    let mut first_sign_change = None;
    let mut previous_s = 0.0;
    for i in 0..options.grid_size {
        let s = if i + 1 == options.grid_size { scan_end } else { i as f64 * step };
        let lap = laplacian(s)?;
        if s <= params.epsilon {
            let r = radial_residual(params, |_| lap, s);
            max_residual = max_residual.max(r);
        }
        if first_sign_change.is_none() && params.residual_factor(s, lap) > 0.0 {
            first_sign_change = Some(if i == 0 {
                0.0
            } else {
                refine_sign_change(params, &laplacian, previous_s, s)?
            });
        }
        previous_s = s;
    }
    // the last grid point may sit just past ε
    if params.epsilon <= scan_end {
        let lap = laplacian(params.epsilon)?;
        max_residual = max_residual.max(radial_residual(params, |_| lap, params.epsilon));
    }

    Ok(BarrierCertificate {
        params: *params,
        component,
        model: options.model,
        grid_size: options.grid_size,
        max_residual,
        certified: max_residual <= CERTIFY_TOLERANCE,
        psi_at_epsilon: params.psi_at_epsilon(),
        orw_root: params.orw_root(),
        closed_form_root: (options.model == LaplacianModel::CurvatureBound)
            .then(|| params.bound_mode_root()),
        first_sign_change,
        scan_end,
    })
}

fn refine_sign_change(
    params: &BarrierParams,
    laplacian: &impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if params.residual_factor(mid, laplacian(mid)?) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Height `H𝕽²/(1 + sqrt(1 − (H𝕽)²))` of a spherical cap of mean curvature
/// `H` over a ball of radius `𝕽 ≤ 1/H`.
pub fn spherical_cap_height(mean_curvature: f64, radius_bound: f64) -> Result<f64> {
    check_nonnegative("H", mean_curvature)?;
    check_positive("radius bound", radius_bound)?;
    let x = mean_curvature * radius_bound;
    if x > 1.0 + 1e-15 {
        return Err(Error::CapDoesNotExist(x));
    }
    let root = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    Ok(mean_curvature * radius_bound * radius_bound / (1.0 + root))
}

/// The cap itself: `−sqrt(1/H² − 𝕽²) + sqrt(1/H² − s²)` for `0 ≤ s ≤ 𝕽`,
/// written in a cancellation-free form.
pub fn spherical_cap_profile(mean_curvature: f64, radius_bound: f64, s: f64) -> Result<f64> {
    let full = spherical_cap_height(mean_curvature, radius_bound)?;
    if !(0.0..=radius_bound).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "s = {s} outside [0, {radius_bound}]"
        )));
    }
    if mean_curvature == 0.0 {
        return Ok(0.0);
    }
    Ok(full - spherical_cap_height(mean_curvature, s.max(f64::MIN_POSITIVE))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{barrier_height_supremum, limit_barrier_height};
    use approx::assert_relative_eq;

    fn annulus() -> DomainSpec {
        DomainSpec::annulus(2, 1.0, 2.0).unwrap()
    }

    #[test]
    fn psi_vanishes_at_zero_and_rejects_outside() {
        let p = BarrierParams::standard(2, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(psi(&p, 0.0).unwrap(), 0.0);
        assert!(psi(&p, -1e-9).is_err());
        assert!(psi(&p, p.epsilon * 1.01).is_err());
        assert!(psi(&p, p.epsilon).is_ok());
    }

    #[test]
    fn parameter_validation() {
        assert!(BarrierParams::new(2, 0.0, 1.0, 1.0, 1.5, 1.0).is_err());
        assert!(BarrierParams::new(2, 0.0, 1.0, 1.5, 1.5, 1.0).is_err());
        assert!(BarrierParams::new(2, -0.1, 1.0, 1.1, 1.5, 1.0).is_err());
        assert!(matches!(
            BarrierParams::new(2, 0.0, 0.0, 1.1, 1.5, 1.0),
            Err(Error::Degenerate(_))
        ));
        let p = BarrierParams::new(3, 0.2, 1.0, 1.1, 1.5, 10.0).unwrap();
        assert_relative_eq!(p.b, p.big_b() * 1.5 + 3.0 * 0.2 * 1.5 * 1.5, max_relative = 1e-15);
        assert_relative_eq!(p.epsilon, 0.4 / p.b, max_relative = 1e-15);
    }

    #[test]
    fn derivatives_have_the_right_signs_and_match_differences() {
        for &(n, h, mu) in &[(2, 0.0, 1.0), (3, 0.05, 0.5), (4, 0.3, 2.0)] {
            let p = BarrierParams::new(n, h, mu, 1.05, 1.7, 10.0).unwrap();
            for i in 1..=200 {
                let s = p.epsilon * i as f64 / 200.0;
                assert!(p.psi_prime(s) > 0.0);
                assert!(p.psi_second(s) < 0.0);
                let ds = 1e-6 * p.epsilon;
                if s + ds <= p.epsilon {
                    let fd = (p.psi_unchecked(s + ds) - p.psi_unchecked(s - ds)) / (2.0 * ds);
                    assert_relative_eq!(fd, p.psi_prime(s), max_relative = 1e-6);
                    let fd2 = (p.psi_prime(s + ds) - p.psi_prime(s - ds)) / (2.0 * ds);
                    assert_relative_eq!(fd2, p.psi_second(s), max_relative = 1e-5);
                }
            }
        }
    }

    #[test]
    fn zero_profile_has_zero_residual_without_curvature() {
        for &lap in &[-3.0, 0.0, 0.7, 12.0] {
            assert_eq!(supersolution_residual(0.0, 0.0, lap, 2, 0.0), 0.0);
        }
    }

    #[test]
    fn residual_nonpositive_under_curvature_bound() {
        let p = BarrierParams::standard(2, 0.0, 1.0, 10.0).unwrap();
        for i in 0..=1000 {
            let s = p.epsilon * i as f64 / 1000.0;
            assert!(radial_residual(&p, |_| p.mu, s) <= CERTIFY_TOLERANCE);
        }
    }

    #[test]
    fn quadratic_reduction_matches_residual_sign() {
        // H = 0: both signs agree everywhere.
        // H > 0: the quadratic is only sufficient, so it dominates.
        for &(n, h, mu) in &[(2, 0.0, 1.0), (3, 0.0, 0.2), (2, 0.01, 1.0), (4, 0.2, 3.0)] {
            let p = BarrierParams::new(n, h, mu, 1.02, 1.9, 100.0).unwrap();
            for i in 0..=2000 {
                let s = 3.0 * p.epsilon * i as f64 / 2000.0;
                let r = radial_residual(&p, |_| p.mu, s);
                let q = p.orw_quadratic(s);
                if h == 0.0 {
                    let scale = p.b;
                    if q.abs() > 1e-12 * scale && r.abs() > 1e-12 * scale {
                        assert_eq!(r.signum(), q.signum(), "s = {s}");
                    }
                } else if q <= 0.0 {
                    assert!(r <= CERTIFY_TOLERANCE, "s = {s}");
                }
            }
        }
    }

    #[test]
    fn orw_root_is_epsilon() {
        for &(n, h, mu) in &[(2, 0.0, 1.0), (3, 0.1, 0.2), (4, 0.5, 7.0)] {
            let p = BarrierParams::new(n, h, mu, 1.01, 1.8, 1e6).unwrap();
            assert_relative_eq!(p.orw_root(), p.epsilon, max_relative = 1e-12);
            assert!(p.bound_mode_root() >= p.orw_root() * (1.0 - 1e-12));
        }
    }

    #[test]
    fn certify_annulus_minimal_case() {
        let d = annulus();
        let p = BarrierParams::new(2, 0.0, 1.0, 1.1, delta(), 1.0).unwrap();
        for comp in [Component::Hole(0), Component::Outer] {
            let cert = certify_barrier(&p, &d, comp, 10_000).unwrap();
            assert!(cert.certified, "{cert:?}");
            assert!(cert.max_residual < 0.0);
        }
    }

    #[test]
    fn certify_with_positive_curvature() {
        let d = annulus();
        let p = BarrierParams::standard(2, 0.05, 1.0, 1.0).unwrap();
        assert_relative_eq!(p.epsilon, (delta() - DEFAULT_ALPHA) / p.b);
        for model in [LaplacianModel::ExactCircle, LaplacianModel::CurvatureBound] {
            for comp in [Component::Hole(0), Component::Outer] {
                let cert = certify_barrier_with(
                    &p,
                    &d,
                    comp,
                    CertifyOptions {
                        model,
                        ..Default::default()
                    },
                )
                .unwrap();
                assert!(cert.certified, "{model:?} {comp}");
            }
        }
    }

    #[test]
    fn diagnostic_scan_reports_sign_change_past_epsilon() {
        let d = annulus();
        let p = BarrierParams::new(2, 0.0, 1.0, 1.1, delta(), 1.0).unwrap();
        let options = CertifyOptions {
            grid_size: 10_000,
            extent: 10.0,
            model: LaplacianModel::CurvatureBound,
        };
        let cert = certify_barrier_with(&p, &d, Component::Hole(0), options).unwrap();
        let change = cert.first_sign_change.expect("bound mode crosses zero");
        assert!(change >= p.epsilon * (1.0 - 1e-12));
        assert_relative_eq!(change, cert.closed_form_root.unwrap(), max_relative = 1e-9);
        assert!(cert.certified);

        // the exact hole Laplacian never crosses for n = 2, H = 0
        let exact = certify_barrier_with(
            &p,
            &d,
            Component::Hole(0),
            CertifyOptions {
                model: LaplacianModel::ExactCircle,
                ..options
            },
        )
        .unwrap();
        assert!(exact.first_sign_change.is_none_or(|s| s >= p.epsilon));
    }

    #[test]
    fn reach_too_small_is_reported() {
        let d = DomainSpec::annulus(2, 1.0, 1.05).unwrap();
        let p = BarrierParams::new(2, 0.0, 1.0, 1.001, delta(), 10.0).unwrap();
        assert!(matches!(
            certify_barrier(&p, &d, Component::Outer, 100),
            Err(Error::ReachTooSmall { .. })
        ));
    }

    #[test]
    fn psi_at_epsilon_is_bounded_by_the_supremum() {
        for &(n, h, mu) in &[(2, 0.0, 1.0), (3, 0.1, 0.4), (2, 0.01, 5.0)] {
            let sup = barrier_height_supremum(n, mu, h);
            for &alpha in &[1.0001, 1.01, 1.3] {
                for &lambda in &[1.4, 1.7, delta(), 2.5, 4.0] {
                    if lambda <= alpha {
                        continue;
                    }
                    let p = BarrierParams::new(n, h, mu, alpha, lambda, 1e6).unwrap();
                    let middle = acosh(lambda) / (lambda * (mu + 2.0 * n as f64 * h));
                    assert!(p.psi_at_epsilon() < middle);
                    assert!(middle <= sup * (1.0 + 1e-14));
                }
            }
        }
    }

    #[test]
    fn psi_at_epsilon_converges_to_limit() {
        for &(n, h, mu, reach) in &[(2, 0.0, 1.0, 1.0), (2, 0.01, 1.0, 1.0), (3, 0.1, 0.5, 0.05)] {
            let limit = limit_barrier_height(n, mu, h, reach);
            let mut values = Vec::new();
            for k in 4..40 {
                let e = 2f64.powi(-k);
                let p = BarrierParams::new(n, h, mu, 1.0 + e, delta() - e, reach).unwrap();
                values.push(p.psi_at_epsilon());
            }
            // acosh(α) ~ sqrt(2(α−1)), so the error shrinks by about 1/√2 per step
            for w in values.windows(3) {
                let (d0, d1) = ((w[1] - w[0]).abs(), (w[2] - w[1]).abs());
                assert!(d1 <= 0.9 * d0 + 1e-15, "{values:?}");
            }
            let last = *values.last().unwrap();
            assert!((last - limit).abs() < 2e-6, "{last} vs {limit}");
            assert!(last < limit);
        }
    }

    #[test]
    fn cap_height_values() {
        assert_eq!(spherical_cap_height(0.0, 3.0).unwrap(), 0.0);
        assert_relative_eq!(spherical_cap_height(0.5, 2.0).unwrap(), 2.0);
        let sagitta = 2.0 - (4.0_f64 - 1.0).sqrt();
        assert_relative_eq!(spherical_cap_height(0.5, 1.0).unwrap(), sagitta, max_relative = 1e-14);
        assert!((spherical_cap_height(0.5, 1.0).unwrap() - 0.26795).abs() < 1e-5);
        assert!(matches!(
            spherical_cap_height(0.6, 2.0),
            Err(Error::CapDoesNotExist(_))
        ));
    }

    #[test]
    fn cap_height_monotone() {
        let mut last = -1.0;
        for i in 0..=100 {
            let h = i as f64 / 100.0;
            let v = spherical_cap_height(h, 1.0).unwrap();
            assert!(v > last);
            last = v;
        }
        let mut last = -1.0;
        for i in 1..=100 {
            let v = spherical_cap_height(0.9, i as f64 / 100.0).unwrap();
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn cap_profile_solves_the_radial_equation() {
        // g'' + (g' + g'³)(n−1)/s + nH(1 + g'²)^{3/2} = 0 for every n
        let (h, rb) = (0.8, 1.0);
        let g = |s: f64| spherical_cap_profile(h, rb, s).unwrap();
        assert_relative_eq!(g(0.0), spherical_cap_height(h, rb).unwrap(), max_relative = 1e-14);
        assert!(g(rb).abs() < 1e-15);
        for n in 2..5 {
            for i in 1..20 {
                let s = 0.9 * i as f64 / 20.0;
                let ds = 1e-4;
                let d1 = (g(s + ds) - g(s - ds)) / (2.0 * ds);
                let d2 = (g(s + ds) - 2.0 * g(s) + g(s - ds)) / (ds * ds);
                let lap = (n - 1) as f64 / s;
                let r = supersolution_residual(d1, d2, lap, n, h);
                assert!(r.abs() < 1e-5, "n={n} s={s} r={r}");
            }
        }
    }
}
