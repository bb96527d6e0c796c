//! Circular multiply connected domains `Ω = Λ \ (Λ̄_1 ∪ … ∪ Λ̄_m)` in ℝⁿ.
//!
//! Boundary components are round spheres whose centres lie in a common
//! coordinate plane, which is all the planar solvers need and gives exact
//! closed forms for reach, mean curvature and `Δd`.
//!
//! Mean curvature is the average of the principal curvatures with respect
//! to the normal pointing into Ω. The outer sphere then has `H = 1/R_o`,
//! each hole has `H = −1/R_i`, and `(n − 1)` only enters through
//! `μ = (n − 1)|H_inf|`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::check_dimension;
use crate::{Error, Result};

pub type Point = [f64; 2];

/// Version tag written into every serialized domain.
pub const DOMAIN_FORMAT: u32 = 1;

/// Relative slack allowed when testing membership of boundary points.
const MEMBERSHIP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point, radius: f64) -> Self {
        Self { center, radius }
    }

    fn center_distance(&self, other: &Circle) -> f64 {
        distance(self.center, other.center)
    }
}

pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// A boundary component. Ordering is the tie-break order: outer first,
/// then holes by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Outer,
    Hole(usize),
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Outer => write!(f, "outer boundary"),
            Component::Hole(i) => write!(f, "hole {i}"),
        }
    }
}

/// The domain: an outer sphere Γ and `m ≥ 1` holes Γ_i.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    n: usize,
    outer: Circle,
    holes: Vec<Circle>,
}

#[derive(Serialize, Deserialize)]
struct DomainFile {
    format: u32,
    n: usize,
    outer: Circle,
    holes: Vec<Circle>,
}

impl DomainSpec {
    pub fn new(n: usize, outer: Circle, holes: Vec<Circle>) -> Result<Self> {
        check_dimension(n).map_err(|e| Error::MalformedDomain(e.to_string()))?;
        let spec = Self { n, outer, holes };
        spec.validate()?;
        Ok(spec)
    }

    /// Concentric annulus centred at the origin.
    pub fn annulus(n: usize, r_inner: f64, r_outer: f64) -> Result<Self> {
        Self::new(
            n,
            Circle::new([0.0, 0.0], r_outer),
            vec![Circle::new([0.0, 0.0], r_inner)],
        )
    }

    fn validate(&self) -> Result<()> {
        let bad_radius = |c: &Circle| !(c.radius.is_finite() && c.radius > 0.0);
        let bad_center = |c: &Circle| !c.center.iter().all(|x| x.is_finite());
        if bad_radius(&self.outer) || bad_center(&self.outer) {
            return Err(Error::MalformedDomain(
                "outer circle needs a finite centre and positive radius".into(),
            ));
        }
        if self.holes.is_empty() {
            return Err(Error::MalformedDomain("at least one hole is required".into()));
        }
        for (i, hole) in self.holes.iter().enumerate() {
            if bad_radius(hole) || bad_center(hole) {
                return Err(Error::MalformedDomain(format!(
                    "hole {i} needs a finite centre and positive radius"
                )));
            }
            if hole.center_distance(&self.outer) + hole.radius >= self.outer.radius {
                return Err(Error::MalformedDomain(format!(
                    "hole {i} is not strictly inside the outer circle"
                )));
            }
        }
        for i in 0..self.holes.len() {
            for j in i + 1..self.holes.len() {
                let (a, b) = (&self.holes[i], &self.holes[j]);
                if a.center_distance(b) <= a.radius + b.radius {
                    return Err(Error::MalformedDomain(format!("holes {i} and {j} overlap")));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn outer(&self) -> &Circle {
        &self.outer
    }

    pub fn holes(&self) -> &[Circle] {
        &self.holes
    }

    pub fn components(&self) -> impl Iterator<Item = Component> + '_ {
        std::iter::once(Component::Outer).chain((0..self.holes.len()).map(Component::Hole))
    }

    pub fn circle(&self, component: Component) -> Result<&Circle> {
        match component {
            Component::Outer => Ok(&self.outer),
            Component::Hole(i) => self
                .holes
                .get(i)
                .ok_or_else(|| Error::InvalidParameter(format!("no hole with index {i}"))),
        }
    }

    /// A single hole sharing the centre of the outer circle.
    pub fn is_concentric_annulus(&self) -> bool {
        self.holes.len() == 1
            && self.holes[0].center_distance(&self.outer) <= MEMBERSHIP_SLACK * self.outer.radius
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DomainFile = serde_json::from_str(text)?;
        if file.format != DOMAIN_FORMAT {
            return Err(Error::MalformedDomain(format!(
                "unsupported domain format {} (expected {DOMAIN_FORMAT})",
                file.format
            )));
        }
        Self::new(file.n, file.outer, file.holes)
    }

    pub fn to_json(&self) -> String {
        let file = DomainFile {
            format: DOMAIN_FORMAT,
            n: self.n,
            outer: self.outer,
            holes: self.holes.clone(),
        };
        serde_json::to_string_pretty(&file).expect("domain serialization cannot fail")
    }
}

impl Serialize for DomainSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DomainFile {
            format: DOMAIN_FORMAT,
            n: self.n,
            outer: self.outer,
            holes: self.holes.clone(),
        }
        .serialize(serializer)
    }
}

/// Closed-form boundary data of a [`DomainSpec`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryGeometry {
    /// Infimum of the boundary mean curvature w.r.t. the inward normal.
    pub h_inf: f64,
    pub reach_outer: f64,
    pub reach_holes: Vec<f64>,
    /// `R = min(reach_outer, reach_holes…)`
    pub reach: f64,
    /// Width of the two-sided tubular neighbourhood of ∂Ω inside Ω̄.
    pub inj_radius: f64,
    /// Radius of the smallest ball containing Ω̄.
    pub circumradius: f64,
}

impl BoundaryGeometry {
    /// `μ = (n − 1)|H_inf|`
    pub fn mu(&self, n: usize) -> f64 {
        (n - 1) as f64 * self.h_inf.abs()
    }

    pub fn component_reach(&self, component: Component) -> Result<f64> {
        match component {
            Component::Outer => Ok(self.reach_outer),
            Component::Hole(i) => self
                .reach_holes
                .get(i)
                .copied()
                .ok_or_else(|| Error::InvalidParameter(format!("no hole with index {i}"))),
        }
    }
}

fn outer_gap(outer: &Circle, hole: &Circle) -> f64 {
    outer.radius - hole.center_distance(outer) - hole.radius
}

fn hole_gap(a: &Circle, b: &Circle) -> f64 {
    a.center_distance(b) - a.radius - b.radius
}

/// Reach, curvature, injectivity radius and circumradius of the domain.
///
/// The inward normal flow from the outer circle focuses at its centre, so
/// `R_Γ` is the smallest gap to a hole capped by `R_o`. Normals leaving a
/// hole never focus in ℝⁿ; `R_{Γ_i}` is the smallest gap to any other
/// component.
pub fn boundary_geometry(d: &DomainSpec) -> BoundaryGeometry {
    let outer = &d.outer;
    let gaps_to_outer: Vec<f64> = d.holes.iter().map(|h| outer_gap(outer, h)).collect();
    let reach_outer = gaps_to_outer.iter().copied().fold(outer.radius, f64::min);

    let mut min_pair_gap = f64::INFINITY;
    let reach_holes: Vec<f64> = d
        .holes
        .iter()
        .enumerate()
        .map(|(i, hi)| {
            let mut r = gaps_to_outer[i];
            for (j, hj) in d.holes.iter().enumerate() {
                if i != j {
                    let g = hole_gap(hi, hj);
                    r = r.min(g);
                    min_pair_gap = min_pair_gap.min(g);
                }
            }
            r
        })
        .collect();
    let reach = reach_holes.iter().copied().fold(reach_outer, f64::min);

    let min_gap = gaps_to_outer.iter().copied().fold(min_pair_gap, f64::min);
    let inj_radius = (0.5 * min_gap).min(outer.radius);

    let min_hole_radius = d.holes.iter().map(|h| h.radius).fold(f64::INFINITY, f64::min);

    BoundaryGeometry {
        h_inf: -1.0 / min_hole_radius,
        reach_outer,
        reach_holes,
        reach,
        inj_radius,
        // Ω̄ contains the outer circle and lies in its disk.
        circumradius: outer.radius,
    }
}

/// `Δd` at distance `s` from one boundary component, valid for `s` below
/// that component's reach.
///
/// Hole of radius `R_i`: `(n−1)/(R_i + s)`. Outer circle: `−(n−1)/(R_o − s)`.
pub fn dist_and_laplacian(d: &DomainSpec, component: Component, s: f64) -> Result<f64> {
    let geometry = boundary_geometry(d);
    let reach = geometry.component_reach(component)?;
    if !(s >= 0.0 && s < reach) {
        return Err(Error::OutOfReach {
            s,
            reach,
            component: component.to_string(),
        });
    }
    circle_distance_laplacian(d, component, s)
}

/// The same closed form as [`dist_and_laplacian`] without the reach check.
/// Holes accept any `s ≥ 0`; the outer circle needs `s < R_o`.
pub fn circle_distance_laplacian(d: &DomainSpec, component: Component, s: f64) -> Result<f64> {
    let nm1 = (d.n - 1) as f64;
    let circle = d.circle(component)?;
    match component {
        Component::Hole(_) => Ok(nm1 / (circle.radius + s)),
        Component::Outer => {
            if s >= circle.radius {
                return Err(Error::OutOfReach {
                    s,
                    reach: circle.radius,
                    component: component.to_string(),
                });
            }
            Ok(-nm1 / (circle.radius - s))
        }
    }
}

/// Distance from `z` to one component, measured into Ω.
pub fn component_distance(d: &DomainSpec, component: Component, z: Point) -> Result<f64> {
    let c = d.circle(component)?;
    Ok(match component {
        Component::Outer => c.radius - distance(z, c.center),
        Component::Hole(_) => distance(z, c.center) - c.radius,
    })
}

/// Distance from `z ∈ Ω̄` to ∂Ω and the nearest component.
/// Ties go to the component that comes first in [`Component`] order.
pub fn signed_distance(d: &DomainSpec, z: Point) -> Result<(f64, Component)> {
    let slack = MEMBERSHIP_SLACK * d.outer.radius;
    let mut best = (f64::INFINITY, Component::Outer);
    for component in d.components() {
        let dist = component_distance(d, component, z)?;
        if dist < -slack || dist.is_nan() {
            return Err(Error::OutsideDomain { x: z[0], y: z[1] });
        }
        if dist < best.0 {
            best = (dist.max(0.0), component);
        }
    }
    Ok(best)
}
