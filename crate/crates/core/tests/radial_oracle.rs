use approx::assert_relative_eq;
use cmc_core::barriers::spherical_cap_height;
use cmc_core::constants::{cmc_constant_c, cmc_height_bound, minimal_height_bound};
use cmc_core::geometry::{boundary_geometry, DomainSpec};
use cmc_core::radial::{
    max_attainable_height, solve_radial, solve_radial_with, FluxFamily, RadialOptions,
    RadialProblem,
};

/// Catenoid over the annulus (1, 2) with neck radius `a ≤ 1`, vanishing on r = 2.
fn catenoid(a: f64, r: f64) -> f64 {
    a * ((2.0 / a).acosh() - (r / a).acosh())
}

fn catenoid_height(a: f64) -> f64 {
    catenoid(a, 1.0)
}

fn neck_for_height(h: f64) -> f64 {
    let (mut lo, mut hi) = (1e-12_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if catenoid_height(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ends = f(a).max(f(b));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if f(c) < f(d) {
            a = c;
        } else {
            b = d;
        }
    }
    f(0.5 * (a + b)).max(f(a)).max(f(b)).max(ends)
}

#[test]
fn matches_catenoid_closed_form() {
    for &h in &[0.1, 0.5, 0.9 * 0.6627, 1.0, 1.25] {
        let p = RadialProblem::new(2, 0.0, 1.0, 2.0, h).unwrap();
        let prof = solve_radial(&p, 1e-12).unwrap();
        assert!(prof.graph_valid);
        let a = neck_for_height(h);
        assert_relative_eq!(prof.flux, -a, epsilon = 1e-9);
        assert_eq!(prof.samples.len(), 1001);
        let worst = prof
            .samples
            .iter()
            .map(|s| (s.u - catenoid(a, s.r)).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "h = {h}: sup error {worst:e}");
    }
}

#[test]
fn supremum_matches_catenoid_maximization() {
    let oracle = golden_max(catenoid_height, 1e-9, 1.0);
    let h_star = max_attainable_height(2, 0.0, 1.0, 2.0).unwrap();
    assert_relative_eq!(h_star, oracle, max_relative = 1e-9);
    let bound = minimal_height_bound(2, 1.0, 1.0).unwrap().h_max;
    assert!(h_star >= bound);
}

#[test]
fn first_integral_is_conserved() {
    for &(n, hh, ri, ro, h) in &[
        (2, 0.0, 1.0, 2.0, 0.8),
        (2, 0.05, 1.0, 2.0, 0.3),
        (3, 0.1, 0.5, 1.5, 0.2),
        (4, 0.02, 1.0, 3.0, 0.5),
    ] {
        let p = RadialProblem::new(n, hh, ri, ro, h).unwrap();
        let prof = solve_radial(&p, 1e-12).unwrap();
        assert!(prof.graph_valid, "{p:?} {:?}", prof.failure);
        let family = FluxFamily::new(n, hh, ri, ro).unwrap();
        for s in &prof.samples {
            let f = family.first_integral(s.r, s.du);
            assert!((f - prof.flux).abs() < 1e-10 * (1.0 + prof.flux.abs()), "{p:?} r = {}", s.r);
            assert!((prof.flux - hh * s.r.powi(n as i32)).abs() < s.r.powi(n as i32 - 1));
        }
        assert_relative_eq!(prof.achieved_h, h, max_relative = 1e-10);
    }
}

#[test]
fn height_decreases_with_flux() {
    let family = FluxFamily::new(3, 0.2, 0.7, 2.0).unwrap();
    let kmax = family.kappa_max();
    let mut last = f64::INFINITY;
    for i in 0..=40 {
        let kappa = kmax * (i as f64 / 40.0).powi(2);
        let h = family.height(kappa, 1e-13).unwrap();
        assert!(h < last, "κ = {kappa}");
        last = h;
    }
}

#[test]
fn disk_reproduces_spherical_caps() {
    for &hr in &[0.25, 0.5, 0.9] {
        for &radius in &[0.5, 1.0, 3.0] {
            let hh = hr / radius;
            for n in 2..5 {
                let p = RadialProblem::new(n, hh, 0.0, radius, 0.0).unwrap();
                let prof = solve_radial(&p, 1e-12).unwrap();
                let cap = spherical_cap_height(hh, radius).unwrap();
                assert!((prof.achieved_h - cap).abs() <= 1e-8 * cap.max(1.0));
                for s in prof.samples.iter().step_by(50) {
                    let exact = (1.0 / (hh * hh) - s.r * s.r).sqrt() - (1.0 / (hh * hh) - radius * radius).sqrt();
                    assert!((s.u - exact).abs() < 1e-8, "n = {n}, r = {}", s.r);
                }
            }
        }
    }
}

#[test]
fn admissible_heights_are_attainable() {
    for &(ri, ro) in &[(1.0, 2.0), (0.5, 1.0), (1.0, 1.5), (2.0, 5.0)] {
        let d = DomainSpec::annulus(2, ri, ro).unwrap();
        let g = boundary_geometry(&d);
        let mu = g.mu(2);
        let c = cmc_constant_c(2, mu, g.circumradius, g.reach).unwrap().c;
        for k in 0..10 {
            let hh = 0.95 * c * k as f64 / 9.0;
            let h_h = cmc_height_bound(2, mu, hh, g.circumradius, g.reach).unwrap();
            for &frac in &[0.25, 0.5, 1.0] {
                let p = RadialProblem::new(2, hh, ri, ro, frac * h_h).unwrap();
                let prof = solve_radial_with(&p, RadialOptions { tol: 1e-10, samples: 11 }).unwrap();
                assert!(prof.graph_valid, "({ri}, {ro}) H = {hh} h = {}", frac * h_h);
            }
            assert!(max_attainable_height(2, hh, ri, ro).unwrap() >= h_h);
        }
    }
}

#[test]
fn value_matches_samples() {
    let p = RadialProblem::new(2, 0.1, 1.0, 2.0, 0.4).unwrap();
    let prof = solve_radial_with(&p, RadialOptions { tol: 1e-12, samples: 21 }).unwrap();
    let family = FluxFamily::new(2, 0.1, 1.0, 2.0).unwrap();
    for s in &prof.samples {
        let v = family.value(prof.kappa, s.r, 1e-14).unwrap();
        assert!((v - s.u).abs() < 1e-12);
    }
}
