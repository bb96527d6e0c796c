//! All closed-form constants for one domain and mean curvature.

use serde::Serialize;

use crate::barriers::BarrierParams;
use crate::constants::{
    ars_comparison_bound, cmc_constant_c, cmc_height_bound, delta, minimal_height_bound, rho,
    ArsBound, MinBranch,
};
use crate::geometry::{boundary_geometry, DomainSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub n: usize,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    pub delta: f64,
    pub h_inf: f64,
    pub mu: f64,
    pub reach: f64,
    pub inj_radius: f64,
    pub radius_bound: f64,
    pub tau: f64,
    pub tau_branch: MinBranch,
    pub sigma: f64,
    pub sigma_branch: MinBranch,
    pub rho: f64,
    pub rho_branch: MinBranch,
    /// Barrier width for `α = 1 + 10⁻³`, `λ = δ`.
    pub epsilon: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub h_max_minimal: f64,
    pub minimal_degenerate: bool,
    #[serde(rename = "h_H")]
    pub h_h: f64,
    pub ars: ArsBound,
    pub ars_bound: f64,
    pub h_max_exceeds_ars: bool,
}

impl BoundsReport {
    /// Fails with [`Error::CurvatureOutOfRange`] when `H ≥ C`.
    pub fn compute(domain: &DomainSpec, mean_curvature: f64) -> Result<Self> {
        let n = domain.n();
        let g = boundary_geometry(domain);
        let mu = g.mu(n);
        let h_inf_abs = g.h_inf.abs();
        let minimal = minimal_height_bound(n, h_inf_abs, g.reach)?;
        let cmc = cmc_constant_c(n, mu, g.circumradius, g.reach)?;
        if mean_curvature >= cmc.c {
            return Err(Error::CurvatureOutOfRange {
                h: mean_curvature,
                c: cmc.c,
            });
        }
        let h_h = cmc_height_bound(n, mu, mean_curvature, g.circumradius, g.reach)?;
        let (rho, rho_branch) = rho(n, mu, mean_curvature, g.reach);
        let epsilon = BarrierParams::standard(n, mean_curvature, mu, g.reach)?.epsilon;
        let ars = ars_comparison_bound(n, h_inf_abs, g.inj_radius)?;
        Ok(Self {
            n,
            mean_curvature,
            delta: delta(),
            h_inf: g.h_inf,
            mu,
            reach: g.reach,
            inj_radius: g.inj_radius,
            radius_bound: g.circumradius,
            tau: minimal.tau,
            tau_branch: minimal.tau_branch,
            sigma: cmc.sigma,
            sigma_branch: cmc.sigma_branch,
            rho,
            rho_branch,
            epsilon,
            c: cmc.c,
            h_max_minimal: minimal.h_max,
            minimal_degenerate: minimal.degenerate,
            h_h,
            ars_bound: ars.bound,
            h_max_exceeds_ars: minimal.h_max > ars.bound,
            ars,
        })
    }
}
