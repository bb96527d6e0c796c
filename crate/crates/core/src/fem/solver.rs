//! Damped Newton and continuation in `t`.
//!
//! For each `t` the discrete problem is `Q_{tH}(u_t) = 0` with
//! `u_t = t·φ` on the boundary, `φ = 0` on the outer circle and `h` on
//! every hole. The path starts at `u_0 = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::assembly::{assemble_residual, max_gradient, NewtonSystem};
use super::mesh::{Mesh, NodeTag};
use crate::geometry::{Component, DomainSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Newton stops once the max-norm of the interior residual is below this.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Step fraction tried first in the line search on the first Newton
    /// iteration of each continuation step; it doubles with every further
    /// iteration up to 1.
    pub initial_damping: f64,
    pub backtrack_factor: f64,
    pub max_halvings: u32,
    pub dt_initial: f64,
    pub dt_growth: f64,
    /// Steps needing fewer Newton iterations than this enlarge `Δt`.
    pub easy_iters: usize,
    pub dt_min: f64,
    /// Newton iterates with a larger elementwise `|∇u|` count as failed.
    pub gradient_cap: f64,
    /// Uniform random perturbation added to every warm start.
    pub perturbation: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-11,
            max_newton_iters: 30,
            initial_damping: 1.0,
            backtrack_factor: 0.5,
            max_halvings: 30,
            dt_initial: 0.1,
            dt_growth: 1.5,
            easy_iters: 4,
            dt_min: 1e-6,
            gradient_cap: 20.0,
            perturbation: 0.0,
            seed: 0,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.newton_tol > 0.0
            && self.max_newton_iters > 0
            && self.initial_damping > 0.0
            && self.initial_damping <= 1.0
            && self.backtrack_factor > 0.0
            && self.backtrack_factor < 1.0
            && self.dt_initial > 0.0
            && self.dt_growth >= 1.0
            && self.dt_min > 0.0
            && self.gradient_cap > 0.0
            && self.perturbation >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid solver configuration {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionField {
    pub u: Vec<f64>,
    pub t: f64,
    pub residual_norm: f64,
    pub newton_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationStep {
    pub t: f64,
    pub newton_iters: usize,
    pub residual_norm: f64,
    pub max_gradient: f64,
    /// Interior residual norms of the Newton iterates, starting guess first.
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationFailure {
    /// Last parameter value that was reached.
    pub t_star: f64,
    pub reason: String,
    /// `max|∇u|` of the last rejected Newton iterate.
    pub max_gradient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationTrace {
    pub steps: Vec<ContinuationStep>,
    pub converged_to_t1: bool,
    pub failure: Option<ContinuationFailure>,
}

/// Nodal Dirichlet data `φ`.
pub fn boundary_data(mesh: &Mesh, h: f64) -> Vec<f64> {
    mesh.tags()
        .iter()
        .map(|t| match t {
            NodeTag::Boundary(Component::Hole(_)) => h,
            _ => 0.0,
        })
        .collect()
}

fn interior_norm(mesh: &Mesh, r: &[f64]) -> f64 {
    r.iter()
        .zip(mesh.tags())
        .filter(|(_, t)| !t.is_boundary())
        .fold(0.0, |m, (x, _)| m.max(x.abs()))
}

struct NewtonOutcome {
    iters: usize,
    residual: f64,
    history: Vec<f64>,
}

/// Damped Newton from `u` (whose boundary values must already be set).
fn newton(
    mesh: &Mesh,
    system: &NewtonSystem,
    u: &mut [f64],
    mean_curvature: f64,
    cfg: &SolverConfig,
) -> std::result::Result<NewtonOutcome, (String, f64)> {
    let fixed = u.to_vec();
    let residual = |v: &[f64]| assemble_residual(mesh, v, mean_curvature, &fixed);
    let mut r = residual(u).map_err(|e| (e.to_string(), f64::NAN))?;
    let mut norm = interior_norm(mesh, &r);
    let mut history = vec![norm];
    let grad = max_gradient(mesh, u);
    if grad > cfg.gradient_cap {
        return Err((format!("gradient {grad:.3e} of the initial guess exceeds the cap"), grad));
    }
    for iter in 0..cfg.max_newton_iters {
        if norm <= cfg.newton_tol {
            return Ok(NewtonOutcome {
                iters: iter,
                residual: norm,
                history,
            });
        }
        let step = system
            .newton_step(mesh, u, &r)
            .map_err(|e| (e.to_string(), max_gradient(mesh, u)))?;
        let mut lambda = (cfg.initial_damping * 2f64.powi(iter as i32)).min(1.0);
        let mut accepted = false;
        let mut trial = u.to_vec();
        for _ in 0..=cfg.max_halvings {
            for ((t, a), s) in trial.iter_mut().zip(u.iter()).zip(&step) {
                *t = a + lambda * s;
            }
            let rt = residual(&trial).map_err(|e| (e.to_string(), f64::NAN))?;
            let nt = interior_norm(mesh, &rt);
            if nt.is_finite() && nt < norm {
                let grad = max_gradient(mesh, &trial);
                if grad > cfg.gradient_cap {
                    return Err((format!("gradient {grad:.3e} exceeds the cap"), grad));
                }
                u.copy_from_slice(&trial);
                r = rt;
                norm = nt;
                accepted = true;
                break;
            }
            lambda *= cfg.backtrack_factor;
        }
        history.push(norm);
        if !accepted {
            return Err((
                "line search found no decrease".into(),
                max_gradient(mesh, &trial),
            ));
        }
    }
    if norm <= cfg.newton_tol {
        return Ok(NewtonOutcome {
            iters: cfg.max_newton_iters,
            residual: norm,
            history,
        });
    }
    Err((
        format!("no convergence in {} iterations", cfg.max_newton_iters),
        max_gradient(mesh, u),
    ))
}

/// Continuation from `t = 0` to `t = 1`. On failure the returned field is
/// the last converged one and the trace names `t*`.
pub fn continuation_solve(
    mesh: &Mesh,
    domain: &DomainSpec,
    h: f64,
    mean_curvature: f64,
    cfg: &SolverConfig,
) -> Result<(SolutionField, ContinuationTrace)> {
    cfg.validate()?;
    if !(h >= 0.0 && h.is_finite() && mean_curvature >= 0.0 && mean_curvature.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need h ≥ 0 and H ≥ 0, got h = {h}, H = {mean_curvature}"
        )));
    }
    if domain.n() != 2 {
        return Err(Error::InvalidParameter("finite elements need n = 2".into()));
    }
    mesh.check_against(domain, 1e-8)?;
    let system = NewtonSystem::new(mesh)?;
    let phi = boundary_data(mesh, h);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut current = SolutionField {
        u: vec![0.0; phi.len()],
        t: 0.0,
        residual_norm: 0.0,
        newton_iters: 0,
    };
    let mut previous: Option<(Vec<f64>, f64)> = None;
    let mut trace = ContinuationTrace {
        steps: Vec::new(),
        converged_to_t1: false,
        failure: None,
    };
    let mut dt = if h == 0.0 && mean_curvature == 0.0 { 1.0 } else { cfg.dt_initial };

    loop {
        let t = (current.t + dt).min(1.0);
        // secant predictor from the last two accepted states
        let mut guess = current.u.clone();
        if let Some((prev_u, prev_t)) = &previous {
            let scale = (t - current.t) / (current.t - prev_t);
            for (g, (a, b)) in guess.iter_mut().zip(current.u.iter().zip(prev_u)) {
                *g = a + scale * (a - b);
            }
        }
        for (i, tag) in mesh.tags().iter().enumerate() {
            if tag.is_boundary() {
                guess[i] = t * phi[i];
            } else if cfg.perturbation > 0.0 {
                guess[i] += cfg.perturbation * rng.random_range(-1.0..1.0);
            }
        }

        match newton(mesh, &system, &mut guess, t * mean_curvature, cfg) {
            Ok(outcome) => {
                trace.steps.push(ContinuationStep {
                    t,
                    newton_iters: outcome.iters,
                    residual_norm: outcome.residual,
                    max_gradient: max_gradient(mesh, &guess),
                    residual_history: outcome.history,
                });
                previous = Some((std::mem::take(&mut current.u), current.t));
                current = SolutionField {
                    u: guess,
                    t,
                    residual_norm: outcome.residual,
                    newton_iters: outcome.iters,
                };
                if t >= 1.0 {
                    trace.converged_to_t1 = true;
                    return Ok((current, trace));
                }
                if outcome.iters < cfg.easy_iters {
                    dt *= cfg.dt_growth;
                }
            }
            Err((reason, grad)) => {
                dt *= 0.5;
                if dt < cfg.dt_min {
                    trace.failure = Some(ContinuationFailure {
                        t_star: current.t,
                        reason,
                        max_gradient: grad,
                    });
                    return Ok((current, trace));
                }
            }
        }
    }
}
