//! Nodal comparison of a discrete solution against barrier fields.

use serde::Serialize;

use super::mesh::{Mesh, NodeTag};
use super::solver::SolutionField;
use crate::barriers::BarrierParams;
use crate::geometry::{boundary_geometry, component_distance, Component, DomainSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierKind {
    Upper,
    Lower,
}

/// Barrier values at mesh nodes; `None` where the barrier is not defined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierField {
    pub label: String,
    pub kind: BarrierKind,
    pub values: Vec<Option<f64>>,
}

impl BarrierField {
    /// The zero function, a lower barrier for every `H ≥ 0`.
    pub fn zero(mesh: &Mesh) -> Self {
        Self {
            label: "zero".into(),
            kind: BarrierKind::Lower,
            values: vec![Some(0.0); mesh.nodes().len()],
        }
    }

    /// A nodal field moved down by `shift`, used as a lower barrier.
    pub fn shifted_lower(label: &str, values: &[f64], shift: f64) -> Self {
        Self {
            label: label.into(),
            kind: BarrierKind::Lower,
            values: values.iter().map(|v| Some(v - shift)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub node: usize,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub bound: f64,
    /// Amount by which the inequality fails.
    pub excess: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub t: f64,
    /// Number of (node, barrier) pairs inspected.
    pub checked: usize,
    pub tolerance: f64,
    /// Largest `u − upper` or `lower − u` seen, violation or not.
    pub max_excess: f64,
    pub violations: Vec<Violation>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `lower ≤ u ≤ upper` wherever each barrier is defined, allowing
/// `tolerance`.
pub fn verify_comparison(
    mesh: &Mesh,
    solution: &SolutionField,
    barriers: &[BarrierField],
    tolerance: f64,
) -> Result<ComparisonReport> {
    let count = mesh.nodes().len();
    if solution.u.len() != count {
        return Err(Error::InvalidParameter(format!(
            "solution has {} values for {count} nodes",
            solution.u.len()
        )));
    }
    let mut report = ComparisonReport {
        t: solution.t,
        checked: 0,
        tolerance,
        max_excess: f64::NEG_INFINITY,
        violations: Vec::new(),
    };
    for barrier in barriers {
        if barrier.values.len() != count {
            return Err(Error::InvalidParameter(format!(
                "barrier {} has {} values for {count} nodes",
                barrier.label,
                barrier.values.len()
            )));
        }
        for (i, value) in barrier.values.iter().enumerate() {
            let Some(bound) = *value else { continue };
            let u = solution.u[i];
            let excess = match barrier.kind {
                BarrierKind::Upper => u - bound,
                BarrierKind::Lower => bound - u,
            };
            report.checked += 1;
            report.max_excess = report.max_excess.max(excess);
            if excess > tolerance {
                let [x, y] = mesh.nodes()[i];
                report.violations.push(Violation {
                    node: i,
                    x,
                    y,
                    u,
                    bound,
                    excess,
                    label: barrier.label.clone(),
                });
            }
        }
    }
    Ok(report)
}

/// `tφ + ψ_{α,λ}∘d` on the tube of width `ε` around each boundary circle,
/// and for `H = 0` also the reflected lower barriers `tφ − ψ∘d` near holes.
pub fn tube_barriers(
    mesh: &Mesh,
    domain: &DomainSpec,
    h: f64,
    mean_curvature: f64,
    t: f64,
    alpha: f64,
    lambda: f64,
) -> Result<Vec<BarrierField>> {
    let geometry = boundary_geometry(domain);
    let mu = geometry.mu(domain.n());
    let mut fields = Vec::new();
    for comp in domain.components() {
        let reach = geometry.component_reach(comp)?;
        let params = BarrierParams::new(domain.n(), mean_curvature, mu, alpha, lambda, reach)?;
        let anchor = match comp {
            Component::Outer => 0.0,
            Component::Hole(_) => t * h,
        };
        let mut upper = Vec::with_capacity(mesh.nodes().len());
        let mut lower = Vec::with_capacity(mesh.nodes().len());
        for (p, tag) in mesh.nodes().iter().zip(mesh.tags()) {
            // boundary nodes of this component sit at distance 0
            let s = match tag {
                NodeTag::Boundary(c) if *c == comp => 0.0,
                _ => component_distance(domain, comp, *p)?.max(0.0),
            };
            if s <= params.epsilon {
                let psi = params.psi_unchecked(s);
                upper.push(Some(anchor + psi));
                lower.push(Some(anchor - psi));
            } else {
                upper.push(None);
                lower.push(None);
            }
        }
        fields.push(BarrierField {
            label: format!("upper {comp}"),
            kind: BarrierKind::Upper,
            values: upper,
        });
        if mean_curvature == 0.0 && matches!(comp, Component::Hole(_)) {
            fields.push(BarrierField {
                label: format!("lower {comp}"),
                kind: BarrierKind::Lower,
                values: lower,
            });
        }
    }
    Ok(fields)
}
