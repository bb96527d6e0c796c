//! Triangulations of planar multiply connected domains.
//!
//! Text format, whitespace separated, indices 0-based:
//!
//! ```text
//! nodes N
//! x y tag        (N lines; tag 0 interior, 1 outer circle, 2+i hole i)
//! triangles M
//! i j k          (M lines, counterclockwise)
//! ```

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::geometry::{Component, DomainSpec, Point};
use crate::{Error, Result};

/// Smallest triangle area accepted by default.
pub const DEFAULT_AREA_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeTag {
    Interior,
    Boundary(Component),
}

impl NodeTag {
    pub fn from_code(code: usize) -> Self {
        match code {
            0 => NodeTag::Interior,
            1 => NodeTag::Boundary(Component::Outer),
            k => NodeTag::Boundary(Component::Hole(k - 2)),
        }
    }

    pub fn code(self) -> usize {
        match self {
            NodeTag::Interior => 0,
            NodeTag::Boundary(Component::Outer) => 1,
            NodeTag::Boundary(Component::Hole(i)) => 2 + i,
        }
    }

    pub fn is_boundary(self) -> bool {
        self != NodeTag::Interior
    }
}

/// Area and barycentric gradients of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub nodes: [usize; 3],
    pub area: f64,
    pub grads: [[f64; 2]; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point>,
    tags: Vec<NodeTag>,
    elements: Vec<Element>,
}

impl Mesh {
    /// Validates orientation, the area floor and that every node on a
    /// boundary edge carries a boundary tag.
    pub fn new(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        tags: Vec<NodeTag>,
        area_floor: f64,
    ) -> Result<Self> {
        if nodes.len() != tags.len() {
            return Err(Error::Mesh(format!(
                "{} nodes but {} tags",
                nodes.len(),
                tags.len()
            )));
        }
        if triangles.is_empty() {
            return Err(Error::Mesh("no triangles".into()));
        }
        let mut elements = Vec::with_capacity(triangles.len());
        let mut edge_count: HashMap<(usize, usize), u32> = HashMap::new();
        for (k, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= nodes.len()) {
                return Err(Error::Mesh(format!("triangle {k} references node {bad}")));
            }
            let [a, b, c] = tri.map(|i| nodes[i]);
            let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            if !(0.5 * area2 >= area_floor) {
                return Err(Error::Mesh(format!(
                    "triangle {k} has area {} (floor {area_floor}); it must be counterclockwise",
                    0.5 * area2
                )));
            }
            let grads = [
                [(b[1] - c[1]) / area2, (c[0] - b[0]) / area2],
                [(c[1] - a[1]) / area2, (a[0] - c[0]) / area2],
                [(a[1] - b[1]) / area2, (b[0] - a[0]) / area2],
            ];
            elements.push(Element {
                nodes: *tri,
                area: 0.5 * area2,
                grads,
            });
            for e in 0..3 {
                let (i, j) = (tri[e], tri[(e + 1) % 3]);
                *edge_count.entry((i.min(j), i.max(j))).or_default() += 1;
            }
        }
        for (&(i, j), &count) in &edge_count {
            if count > 2 {
                return Err(Error::Mesh(format!("edge ({i}, {j}) is shared by {count} triangles")));
            }
            if count == 1 {
                for v in [i, j] {
                    if !tags[v].is_boundary() {
                        return Err(Error::Mesh(format!(
                            "node {v} lies on a boundary edge but is tagged interior"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            nodes,
            tags,
            elements,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn tags(&self) -> &[NodeTag] {
        &self.tags
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn triangle_count(&self) -> usize {
        self.elements.len()
    }

    /// Checks that every boundary node lies on its circle.
    pub fn check_against(&self, domain: &DomainSpec, tol: f64) -> Result<()> {
        for (i, (p, tag)) in self.nodes.iter().zip(&self.tags).enumerate() {
            if let NodeTag::Boundary(comp) = tag {
                let circle = domain.circle(*comp)?;
                let off = (crate::geometry::distance(*p, circle.center) - circle.radius).abs();
                if off > tol {
                    return Err(Error::Mesh(format!(
                        "node {i} tagged {comp} is {off:e} away from its circle"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_degrees(&self) -> f64 {
        let mut min = f64::INFINITY;
        for e in &self.elements {
            let p = e.nodes.map(|i| self.nodes[i]);
            for k in 0..3 {
                let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
                min = min.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
        min
    }

    /// Longest edge.
    pub fn max_edge(&self) -> f64 {
        let mut max: f64 = 0.0;
        for e in &self.elements {
            for k in 0..3 {
                let a = self.nodes[e.nodes[k]];
                let b = self.nodes[e.nodes[(k + 1) % 3]];
                max = max.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        max
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "nodes {}", self.nodes.len());
        for (p, tag) in self.nodes.iter().zip(&self.tags) {
            let _ = writeln!(out, "{} {} {}", p[0], p[1], tag.code());
        }
        let _ = writeln!(out, "triangles {}", self.elements.len());
        for e in &self.elements {
            let _ = writeln!(out, "{} {} {}", e.nodes[0], e.nodes[1], e.nodes[2]);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| {
            tokens
                .next()
                .ok_or_else(|| Error::Mesh(format!("unexpected end of input reading {what}")))
        };
        fn parse<T: std::str::FromStr>(tok: &str, what: &str) -> Result<T> {
            tok.parse()
                .map_err(|_| Error::Mesh(format!("cannot parse {what} from {tok:?}")))
        }
        let header = next("header")?;
        if header != "nodes" {
            return Err(Error::Mesh(format!("expected \"nodes\", found {header:?}")));
        }
        let count: usize = parse(next("node count")?, "node count")?;
        let mut nodes = Vec::with_capacity(count);
        let mut tags = Vec::with_capacity(count);
        for _ in 0..count {
            let x = parse(next("x")?, "x")?;
            let y = parse(next("y")?, "y")?;
            nodes.push([x, y]);
            tags.push(NodeTag::from_code(parse(next("tag")?, "tag")?));
        }
        let header = next("header")?;
        if header != "triangles" {
            return Err(Error::Mesh(format!("expected \"triangles\", found {header:?}")));
        }
        let count: usize = parse(next("triangle count")?, "triangle count")?;
        let mut triangles = Vec::with_capacity(count);
        for _ in 0..count {
            let mut tri = [0usize; 3];
            for v in &mut tri {
                *v = parse(next("vertex index")?, "vertex index")?;
            }
            triangles.push(tri);
        }
        if let Ok(extra) = next("trailing") {
            return Err(Error::Mesh(format!("trailing token {extra:?}")));
        }
        Self::new(nodes, triangles, tags, DEFAULT_AREA_FLOOR)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_text())?)
    }
}

/// Structured polar triangulation of a concentric annulus.
///
/// Cells are close to square: `ceil(2π sqrt(r_i r_o)/edge)` sectors and
/// geometrically spaced rings with the same aspect. Other domains have to
/// bring their own mesh.
pub fn mesh_annulus(domain: &DomainSpec, target_edge: f64) -> Result<Mesh> {
    if domain.n() != 2 {
        return Err(Error::Mesh(format!(
            "finite elements are planar; got n = {}",
            domain.n()
        )));
    }
    if !domain.is_concentric_annulus() {
        return Err(Error::Mesh(
            "only concentric annuli are meshed internally; import a mesh for this domain".into(),
        ));
    }
    if !(target_edge > 0.0 && target_edge.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target edge must be positive, got {target_edge}"
        )));
    }
    let center = domain.outer().center;
    let (ri, ro) = (domain.holes()[0].radius, domain.outer().radius);
    let sectors = ((2.0 * PI * (ri * ro).sqrt() / target_edge).ceil() as usize).max(12);
    let dtheta = 2.0 * PI / sectors as f64;
    let rings = (((ro / ri).ln() / dtheta).round() as usize).max(1);

    let mut nodes = Vec::with_capacity((rings + 1) * sectors);
    let mut tags = Vec::with_capacity(nodes.capacity());
    for k in 0..=rings {
        let r = if k == rings {
            ro
        } else {
            ri * (ro / ri).powf(k as f64 / rings as f64)
        };
        let tag = match k {
            0 => NodeTag::Boundary(Component::Hole(0)),
            _ if k == rings => NodeTag::Boundary(Component::Outer),
            _ => NodeTag::Interior,
        };
        for j in 0..sectors {
            let (s, c) = (j as f64 * dtheta).sin_cos();
            nodes.push([center[0] + r * c, center[1] + r * s]);
            tags.push(tag);
        }
    }
    let id = |k: usize, j: usize| k * sectors + j % sectors;
    let mut triangles = Vec::with_capacity(2 * rings * sectors);
    for k in 0..rings {
        for j in 0..sectors {
            triangles.push([id(k, j), id(k + 1, j), id(k + 1, j + 1)]);
            triangles.push([id(k, j), id(k + 1, j + 1), id(k, j + 1)]);
        }
    }
    Mesh::new(nodes, triangles, tags, DEFAULT_AREA_FLOOR)
}
