//! Rotationally symmetric solutions.
//!
//! For `u = u(r)` the equation has the first integral
//!
//! ```text
//! r^{n−1} u' / sqrt(1 + u'²) = c − H rⁿ
//! ```
//!
//! so `u' = q / sqrt((P + q)(P − q))` with `q = c − H rⁿ`, `P = r^{n−1}`.
//! The graph exists iff `|q| < P` on the whole interval, which confines the
//! flux `c` to `(max{g(r_i), g(r_o)}, G(r_i))` with `g = H rⁿ − r^{n−1}`
//! and `G = H rⁿ + r^{n−1}`. The height `u(r_i)` is strictly decreasing in
//! `c`, so its supremum is reached at the lower end, where the gradient
//! blows up on one boundary circle.
//!
//! Internally the flux is `c = c_lo + κ` and both factors `P ± q` are
//! evaluated through exact power differences from the nearest endpoint,
//! so nothing cancels as `κ → 0`. The integrals use `r = r_end ± t²`
//! near each endpoint, which removes the inverse square root.

use serde::{Deserialize, Serialize};

use crate::constants::{check_dimension, check_nonnegative, check_positive};
use crate::geometry::DomainSpec;
use crate::quad::integrate;
use crate::{Error, Result};

pub const DEFAULT_SAMPLES: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    pub n: usize,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    /// Zero for a disk.
    pub r_inner: f64,
    pub r_outer: f64,
    /// Value on the inner circle; the outer circle carries zero.
    pub h: f64,
}

impl RadialProblem {
    pub fn new(n: usize, mean_curvature: f64, r_inner: f64, r_outer: f64, h: f64) -> Result<Self> {
        let p = Self {
            n,
            mean_curvature,
            r_inner,
            r_outer,
            h,
        };
        p.validate()?;
        Ok(p)
    }

    /// The problem on a concentric annulus.
    pub fn on_domain(domain: &DomainSpec, mean_curvature: f64, h: f64) -> Result<Self> {
        if !domain.is_concentric_annulus() {
            return Err(Error::InvalidParameter(
                "the radial solver needs a concentric annulus".into(),
            ));
        }
        Self::new(
            domain.n(),
            mean_curvature,
            domain.holes()[0].radius,
            domain.outer().radius,
            h,
        )
    }

    pub fn validate(&self) -> Result<()> {
        check_dimension(self.n)?;
        check_nonnegative("H", self.mean_curvature)?;
        check_nonnegative("r_inner", self.r_inner)?;
        check_positive("r_outer", self.r_outer)?;
        check_nonnegative("h", self.h)?;
        if self.r_inner >= self.r_outer {
            return Err(Error::InvalidParameter(format!(
                "r_inner = {} must be below r_outer = {}",
                self.r_inner, self.r_outer
            )));
        }
        if self.r_inner == 0.0 && self.h != 0.0 {
            return Err(Error::InvalidParameter(
                "a disk has no inner boundary; h must be 0".into(),
            ));
        }
        Ok(())
    }

    pub fn is_disk(&self) -> bool {
        self.r_inner == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialSample {
    pub r: f64,
    pub u: f64,
    pub du: f64,
}

/// Why a requested height has no graph solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialFailure {
    /// `h ≥ h*`: the gradient blows up on the circle of radius `r`.
    AboveMaximum { h_star: f64, r: f64 },
    /// `h` below every graph in the family; the gradient blows up at `r_inner`.
    BelowMinimum { h_min: f64, r: f64 },
    /// `H r_outer > 1` on a disk.
    NoCap { h_r: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub problem: RadialProblem,
    /// The first-integral constant `c`.
    pub flux: f64,
    /// Offset of `flux` above the lower end of the admissible range.
    pub kappa: f64,
    pub samples: Vec<RadialSample>,
    pub achieved_h: f64,
    pub graph_valid: bool,
    /// Supremum of attainable heights.
    pub max_height: f64,
    pub failure: Option<RadialFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOptions {
    /// Relative tolerance on the height.
    pub tol: f64,
    pub samples: usize,
}

impl Default for RadialOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            samples: DEFAULT_SAMPLES,
        }
    }
}

/// `(x^k − y^k)/(x − y)`, evaluated without the subtraction.
fn power_quotient(x: f64, y: f64, k: usize) -> f64 {
    let (mut sum, mut yp) = (0.0, 1.0);
    for _ in 0..k {
        sum = sum * x + yp;
        yp *= y;
    }
    sum
}

/// The one-parameter family of radial graphs over `r_inner ≤ r ≤ r_outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxFamily {
    n: usize,
    hh: f64,
    ri: f64,
    ro: f64,
    len: f64,
    c_lo: f64,
    c_hi: f64,
    /// `c_lo − g(r_i)` and `c_lo − g(r_o)`
    gap_inner: f64,
    gap_outer: f64,
}

impl FluxFamily {
    pub fn new(n: usize, mean_curvature: f64, r_inner: f64, r_outer: f64) -> Result<Self> {
        RadialProblem::new(n, mean_curvature, r_inner, r_outer, 0.0)?;
        let hh = mean_curvature;
        let pw = |r: f64, k: usize| r.powi(k as i32);
        let g = |r: f64| hh * pw(r, n) - pw(r, n - 1);
        let (gi, go) = (g(r_inner), g(r_outer));
        let c_lo = if r_inner == 0.0 { 0.0 } else { gi.max(go) };
        Ok(Self {
            n,
            hh,
            ri: r_inner,
            ro: r_outer,
            len: r_outer - r_inner,
            c_lo,
            c_hi: hh * pw(r_inner, n) + pw(r_inner, n - 1),
            gap_inner: c_lo - gi,
            gap_outer: c_lo - go,
        })
    }

    pub fn flux(&self, kappa: f64) -> f64 {
        self.c_lo + kappa
    }

    /// Width of the admissible flux range.
    pub fn kappa_max(&self) -> f64 {
        self.c_hi - self.c_lo
    }

    /// Endpoint where the gradient blows up at `κ = 0`.
    pub fn critical_radius(&self) -> f64 {
        if self.gap_inner <= self.gap_outer {
            self.ri
        } else {
            self.ro
        }
    }

    fn is_disk(&self) -> bool {
        self.ri == 0.0
    }

    /// `(P + q, P − q)` at the point `r_i + x = r_o − y`.
    fn factors(&self, kappa: f64, x: f64, y: f64) -> (f64, f64) {
        let (n, hh, ri, ro) = (self.n, self.hh, self.ri, self.ro);
        if self.is_disk() {
            // c = 0: P ± q = r^{n−1}(1 ∓ H r); only the ratio matters
            let r = if x <= y { x } else { ro - y };
            let minus = if x <= y { 1.0 - hh * r } else { (1.0 - hh * ro) + hh * y };
            return (minus, 1.0 + hh * r);
        }
        let kappa_rest = self.kappa_max() - kappa;
        if x <= y {
            let r = ri + x;
            let sn = power_quotient(r, ri, n);
            let sm = power_quotient(r, ri, n - 1);
            (kappa + self.gap_inner - x * (hh * sn - sm), kappa_rest + x * (hh * sn + sm))
        } else {
            let r = ro - y;
            let sn = power_quotient(ro, r, n);
            let sm = power_quotient(ro, r, n - 1);
            let to_outer = self.c_hi - (hh * ro.powi(n as i32) + ro.powi(n as i32 - 1));
            (
                kappa + self.gap_outer + y * (hh * sn - sm),
                // G(r) − c = (G(r_o) − c) − (G(r_o) − G(r))
                kappa_rest - to_outer - y * (hh * sn + sm),
            )
        }
    }

    fn slope_at(&self, kappa: f64, x: f64, y: f64) -> f64 {
        let (plus, minus) = self.factors(kappa, x, y);
        if self.is_disk() {
            let r = if x <= y { x } else { self.ro - y };
            return -self.hh * r / (plus * minus).sqrt();
        }
        0.5 * (plus - minus) / (plus * minus).sqrt()
    }

    /// `u'(r)`
    pub fn slope(&self, kappa: f64, r: f64) -> f64 {
        self.slope_at(kappa, r - self.ri, self.ro - r)
    }

    /// `∫ −u'` over `[r_i + a, r_i + b]`, given as offsets from `r_i`.
    fn drop_between(&self, kappa: f64, a: f64, b: f64, tol: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let mid = 0.5 * (a + b);
        let inner = |t: f64| {
            if t == 0.0 {
                return 0.0;
            }
            let x = a + t * t;
            -2.0 * t * self.slope_at(kappa, x, self.len - x)
        };
        let outer_start = self.len - b;
        let outer = |t: f64| {
            if t == 0.0 {
                return 0.0;
            }
            let y = outer_start + t * t;
            -2.0 * t * self.slope_at(kappa, self.len - y, y)
        };
        let first = integrate(&inner, 0.0, (mid - a).sqrt(), 0.5 * tol);
        let second = integrate(&outer, 0.0, (b - mid).sqrt(), 0.5 * tol);
        match (first, second) {
            (Ok(p), Ok(q)) => Ok(p + q),
            _ => Err(Error::Quadrature {
                a: self.ri + a,
                b: self.ri + b,
                error: tol,
            }),
        }
    }

    /// `u(r_i)` for the graph with flux offset `κ`.
    pub fn height(&self, kappa: f64, tol: f64) -> Result<f64> {
        self.drop_between(kappa, 0.0, self.len, tol)
    }

    /// `u(r)` for the graph with flux offset `κ`.
    pub fn value(&self, kappa: f64, r: f64, tol: f64) -> Result<f64> {
        self.drop_between(kappa, (r - self.ri).max(0.0), self.len, tol)
    }

    /// First integral `r^{n−1}u'/sqrt(1+u'²) + H rⁿ`.
    pub fn first_integral(&self, r: f64, du: f64) -> f64 {
        r.powi(self.n as i32 - 1) * du / (1.0 + du * du).sqrt() + self.hh * r.powi(self.n as i32)
    }
}

/// Solves for the radial graph with `u(r_outer) = 0`, `u(r_inner) = h`.
pub fn solve_radial(problem: &RadialProblem, tol: f64) -> Result<RadialProfile> {
    solve_radial_with(
        problem,
        RadialOptions {
            tol,
            ..Default::default()
        },
    )
}

pub fn solve_radial_with(problem: &RadialProblem, options: RadialOptions) -> Result<RadialProfile> {
    problem.validate()?;
    if !(options.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            options.tol
        )));
    }
    if options.samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let family = FluxFamily::new(
        problem.n,
        problem.mean_curvature,
        problem.r_inner,
        problem.r_outer,
    )?;
    let h = problem.h;
    let quad_tol = (1e-3 * options.tol * h.max(1.0)).max(1e-14);

    if problem.is_disk() {
        let h_r = problem.mean_curvature * problem.r_outer;
        if h_r > 1.0 {
            return Ok(RadialProfile {
                problem: *problem,
                flux: 0.0,
                kappa: 0.0,
                samples: Vec::new(),
                achieved_h: f64::NAN,
                graph_valid: false,
                max_height: f64::NAN,
                failure: Some(RadialFailure::NoCap { h_r }),
            });
        }
        let samples = sample(&family, 0.0, options.samples, quad_tol)?;
        let top = samples[0].u;
        return Ok(RadialProfile {
            problem: *problem,
            flux: 0.0,
            kappa: 0.0,
            achieved_h: top,
            graph_valid: h_r < 1.0,
            max_height: top,
            failure: None,
            samples,
        });
    }

    if problem.mean_curvature == 0.0 && h == 0.0 {
        let len = problem.r_outer - problem.r_inner;
        let last = options.samples - 1;
        let samples = (0..options.samples)
            .map(|k| RadialSample {
                r: if k == last { problem.r_outer } else { problem.r_inner + len * k as f64 / last as f64 },
                u: 0.0,
                du: 0.0,
            })
            .collect();
        return Ok(RadialProfile {
            problem: *problem,
            flux: 0.0,
            kappa: -family.c_lo,
            samples,
            achieved_h: 0.0,
            graph_valid: true,
            max_height: family.height(0.0, quad_tol)?,
            failure: None,
        });
    }

    let h_star = family.height(0.0, quad_tol)?;
    let kappa_max = family.kappa_max();
    let h_min = family.height(kappa_max, quad_tol)?;
    let failed = |kappa: f64, failure| -> Result<RadialProfile> {
        let samples = sample(&family, kappa, options.samples, quad_tol)?;
        Ok(RadialProfile {
            problem: *problem,
            flux: family.flux(kappa),
            kappa,
            achieved_h: samples[0].u,
            samples,
            graph_valid: false,
            max_height: h_star,
            failure: Some(failure),
        })
    };
    if !(h < h_star) {
        return failed(
            0.0,
            RadialFailure::AboveMaximum {
                h_star,
                r: family.critical_radius(),
            },
        );
    }
    if h < h_min {
        return failed(
            kappa_max,
            RadialFailure::BelowMinimum {
                h_min,
                r: problem.r_inner,
            },
        );
    }

    // bisection in sqrt(κ): the height behaves like h* − c·sqrt(κ) near 0
    let target = options.tol * h.max(1.0);
    let (mut lo, mut hi) = (0.0_f64, kappa_max.sqrt());
    let (mut h_lo, mut h_hi) = (h_star, h_min);
    let mut best = (hi, h_hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let hm = family.height(mid * mid, quad_tol)?;
        let slack = 10.0 * quad_tol;
        if hm > h_lo + slack || hm < h_hi - slack {
            return Err(Error::Degenerate(format!(
                "height is not monotone in the flux near c = {}",
                family.flux(mid * mid)
            )));
        }
        if (hm - h).abs() < (best.1 - h).abs() {
            best = (mid, hm);
        }
        if (hm - h).abs() <= target {
            break;
        }
        if hm > h {
            lo = mid;
            h_lo = hm;
        } else {
            hi = mid;
            h_hi = hm;
        }
    }
    let kappa = best.0 * best.0;
    let samples = sample(&family, kappa, options.samples, quad_tol)?;
    Ok(RadialProfile {
        problem: *problem,
        flux: family.flux(kappa),
        kappa,
        achieved_h: samples[0].u,
        samples,
        graph_valid: kappa > 0.0,
        max_height: h_star,
        failure: None,
    })
}

fn sample(family: &FluxFamily, kappa: f64, count: usize, tol: f64) -> Result<Vec<RadialSample>> {
    let last = count - 1;
    let offsets: Vec<f64> = (0..count)
        .map(|k| if k == last { family.len } else { family.len * k as f64 / last as f64 })
        .collect();
    let mut samples = vec![
        RadialSample {
            r: 0.0,
            u: 0.0,
            du: 0.0
        };
        count
    ];
    let mut u = 0.0;
    for k in (0..count).rev() {
        if k < last {
            u += family.drop_between(kappa, offsets[k], offsets[k + 1], tol / last as f64)?;
        }
        let x = offsets[k];
        let r = if k == last { family.ro } else { family.ri + x };
        samples[k] = RadialSample {
            r,
            u,
            du: family.slope_at(kappa, x, family.len - x),
        };
    }
    Ok(samples)
}

/// Supremum of `u(r_inner)` over radial graphs vanishing on the outer circle.
pub fn max_attainable_height(n: usize, mean_curvature: f64, r_inner: f64, r_outer: f64) -> Result<f64> {
    check_positive("r_inner", r_inner)?;
    FluxFamily::new(n, mean_curvature, r_inner, r_outer)?.height(0.0, 1e-14)
}

/// Largest `h` for which [`solve_radial`] still returns a valid graph,
/// found by bisection on `h` alone to within `h_tol`. The radial solver is
/// treated as a black box: only `graph_valid` is consulted.
pub fn existence_threshold(
    n: usize,
    mean_curvature: f64,
    r_inner: f64,
    r_outer: f64,
    h_tol: f64,
) -> Result<f64> {
    check_positive("r_inner", r_inner)?;
    check_positive("h tolerance", h_tol)?;
    let valid = |h: f64| -> Result<bool> {
        let p = RadialProblem::new(n, mean_curvature, r_inner, r_outer, h)?;
        let prof = solve_radial_with(&p, RadialOptions { tol: 1e-10, samples: 2 })?;
        Ok(prof.graph_valid)
    };
    if !valid(0.0)? {
        return Err(Error::Degenerate("no radial graph with h = 0".into()));
    }
    let (mut lo, mut hi) = (0.0, r_outer);
    while valid(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 * r_outer {
            return Err(Error::Degenerate("no upper bracket for the threshold".into()));
        }
    }
    while hi - lo > h_tol {
        let mid = 0.5 * (lo + hi);
        if valid(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_quotient_matches_direct() {
        for k in 0..6 {
            let (x, y) = (1.7_f64, 1.3_f64);
            let direct = if k == 0 { 0.0 } else { (x.powi(k) - y.powi(k)) / (x - y) };
            assert_relative_eq!(power_quotient(x, y, k as usize), direct, max_relative = 1e-13);
        }
        assert_eq!(power_quotient(2.0, 0.0, 3), 4.0);
    }

    #[test]
    fn threshold_brackets_supremum() {
        let h_star = max_attainable_height(2, 0.0, 1.0, 2.0).unwrap();
        let t = existence_threshold(2, 0.0, 1.0, 2.0, 1e-6).unwrap();
        assert!(t <= h_star && h_star - t <= 1e-6 + 1e-9);
    }

    #[test]
    fn flat_problem_is_zero() {
        let p = RadialProblem::new(2, 0.0, 1.0, 2.0, 0.0).unwrap();
        let prof = solve_radial(&p, 1e-10).unwrap();
        assert_eq!(prof.flux, 0.0);
        assert!(prof.samples.iter().all(|s| s.u == 0.0 && s.du == 0.0));
        assert!(prof.graph_valid);
    }

    #[test]
    fn catenoid_supremum() {
        let h = max_attainable_height(2, 0.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(h, 2f64.acosh(), max_relative = 1e-12);
    }

    #[test]
    fn outer_value_is_exact_zero() {
        let p = RadialProblem::new(3, 0.1, 0.5, 1.5, 0.3).unwrap();
        let prof = solve_radial(&p, 1e-11).unwrap();
        assert_eq!(prof.samples.last().unwrap().u, 0.0);
        assert_eq!(prof.samples.last().unwrap().r, 1.5);
        assert_relative_eq!(prof.achieved_h, 0.3, max_relative = 1e-9);
    }

    #[test]
    fn invalid_problems() {
        assert!(RadialProblem::new(1, 0.0, 1.0, 2.0, 0.0).is_err());
        assert!(RadialProblem::new(2, 0.0, 2.0, 1.0, 0.0).is_err());
        assert!(RadialProblem::new(2, 0.0, 0.0, 1.0, 0.5).is_err());
        let p = RadialProblem::new(2, 0.0, 1.0, 2.0, 0.5).unwrap();
        assert!(solve_radial(&p, 0.0).is_err());
    }

    #[test]
    fn too_tall_is_reported_as_data() {
        let p = RadialProblem::new(2, 0.0, 1.0, 2.0, 2.0).unwrap();
        let prof = solve_radial(&p, 1e-10).unwrap();
        assert!(!prof.graph_valid);
        match prof.failure {
            Some(RadialFailure::AboveMaximum { h_star, r }) => {
                assert_relative_eq!(h_star, 2f64.acosh(), max_relative = 1e-10);
                assert_eq!(r, 1.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn disk_gives_cap() {
        let p = RadialProblem::new(2, 0.5, 0.0, 1.0, 0.0).unwrap();
        let prof = solve_radial(&p, 1e-12).unwrap();
        let cap = crate::barriers::spherical_cap_height(0.5, 1.0).unwrap();
        assert_relative_eq!(prof.achieved_h, cap, max_relative = 1e-10);
        let p = RadialProblem::new(2, 1.5, 0.0, 1.0, 0.0).unwrap();
        let prof = solve_radial(&p, 1e-12).unwrap();
        assert!(matches!(prof.failure, Some(RadialFailure::NoCap { .. })));
    }
}
