//! P1 residual and Newton matrix of the mean curvature operator.
//!
//! The gradient is constant on each triangle, so one-point quadrature is
//! exact for the flux term and `∫_T χ_i = |T|/3` for the source.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{Pair, SparseColMat, SymbolicSparseColMat};
use faer::{Mat, Side};

use super::mesh::Mesh;
use crate::{Error, Result};

/// Dimension of the finite element problems.
const N: f64 = 2.0;

fn element_gradient(u: &[f64], e: &super::mesh::Element) -> [f64; 2] {
    let mut g = [0.0; 2];
    for k in 0..3 {
        let v = u[e.nodes[k]];
        g[0] += v * e.grads[k][0];
        g[1] += v * e.grads[k][1];
    }
    g
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Largest elementwise `|∇u|`.
pub fn max_gradient(mesh: &Mesh, u: &[f64]) -> f64 {
    mesh.elements()
        .iter()
        .map(|e| {
            let g = element_gradient(u, e);
            g[0].hypot(g[1])
        })
        .fold(0.0, f64::max)
}

/// Interior rows: `Σ_T |T| (∇u·∇χ_i)/W − nH|T|/3`. Boundary rows:
/// `u_i − boundary_i`.
pub fn assemble_residual(mesh: &Mesh, u: &[f64], mean_curvature: f64, boundary: &[f64]) -> Result<Vec<f64>> {
    let count = mesh.nodes().len();
    if u.len() != count || boundary.len() != count {
        return Err(Error::InvalidParameter(format!(
            "expected {count} nodal values, got {} and {}",
            u.len(),
            boundary.len()
        )));
    }
    let mut r = vec![0.0; count];
    let source = N * mean_curvature / 3.0;
    for e in mesh.elements() {
        let g = element_gradient(u, e);
        let w = (1.0 + dot(g, g)).sqrt();
        for k in 0..3 {
            r[e.nodes[k]] += e.area * (dot(g, e.grads[k]) / w - source);
        }
    }
    for (i, tag) in mesh.tags().iter().enumerate() {
        if tag.is_boundary() {
            r[i] = u[i] - boundary[i];
        }
    }
    Ok(r)
}

/// Directional derivative of the interior residual rows along `v`
/// (boundary rows of the result are zero).
pub fn apply_jacobian(mesh: &Mesh, u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for e in mesh.elements() {
        let g = element_gradient(u, e);
        let dv = element_gradient(v, e);
        let w2 = 1.0 + dot(g, g);
        let w = w2.sqrt();
        let gdv = dot(g, dv);
        for k in 0..3 {
            let gi = e.grads[k];
            out[e.nodes[k]] += e.area * (dot(dv, gi) / w - dot(g, gi) * gdv / (w2 * w));
        }
    }
    for (i, tag) in mesh.tags().iter().enumerate() {
        if tag.is_boundary() {
            out[i] = 0.0;
        }
    }
    out
}

/// Newton matrix on the interior unknowns with a fixed sparsity pattern.
/// The symbolic Cholesky factorization is computed once.
pub struct NewtonSystem {
    /// Interior index of each node, `usize::MAX` on the boundary.
    interior_index: Vec<usize>,
    interior_nodes: Vec<usize>,
    pattern: SymbolicSparseColMat<usize>,
    order: faer::sparse::Argsort<usize>,
    symbolic: SymbolicLlt<usize>,
}

impl NewtonSystem {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let mut interior_index = vec![usize::MAX; mesh.nodes().len()];
        let mut interior_nodes = Vec::new();
        for (i, tag) in mesh.tags().iter().enumerate() {
            if !tag.is_boundary() {
                interior_index[i] = interior_nodes.len();
                interior_nodes.push(i);
            }
        }
        let dim = interior_nodes.len();
        if dim == 0 {
            return Err(Error::Mesh("mesh has no interior nodes".into()));
        }
        let mut pairs = Vec::new();
        for_each_lower_entry(mesh, &interior_index, |row, col, _, _| {
            pairs.push(Pair { row, col });
        });
        let (pattern, order) = SymbolicSparseColMat::try_new_from_indices(dim, dim, &pairs)
            .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
        let symbolic = SymbolicLlt::try_new(pattern.as_ref(), Side::Lower)
            .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
        Ok(Self {
            interior_index,
            interior_nodes,
            pattern,
            order,
            symbolic,
        })
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    /// Lower triangle values in the order of the pattern construction.
    fn values(&self, mesh: &Mesh, u: &[f64]) -> Vec<f64> {
        let mut values = Vec::new();
        let mut cache: Option<(usize, [f64; 2], f64)> = None;
        for_each_lower_entry(mesh, &self.interior_index, |_, _, (t, a, b), e| {
            let (g, w) = match cache {
                Some((ct, g, w)) if ct == t => (g, w),
                _ => {
                    let g = element_gradient(u, e);
                    let w = (1.0 + dot(g, g)).sqrt();
                    cache = Some((t, g, w));
                    (g, w)
                }
            };
            let (gi, gj) = (e.grads[a], e.grads[b]);
            values.push(e.area * (dot(gi, gj) / w - dot(g, gi) * dot(g, gj) / (w * w * w)));
        });
        values
    }

    /// Solves `J δ = −r` restricted to interior nodes; returns the full
    /// nodal update (zero on the boundary).
    pub fn newton_step(&self, mesh: &Mesh, u: &[f64], residual: &[f64]) -> Result<Vec<f64>> {
        let values = self.values(mesh, u);
        let matrix = SparseColMat::new_from_argsort(self.pattern.clone(), &self.order, &values)
            .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
        let llt = Llt::try_new_with_symbolic(self.symbolic.clone(), matrix.as_ref(), Side::Lower)
            .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
        let dim = self.interior_nodes.len();
        let mut rhs = Mat::<f64>::from_fn(dim, 1, |i, _| -residual[self.interior_nodes[i]]);
        llt.solve_in_place(rhs.as_mut());
        let mut step = vec![0.0; u.len()];
        for (i, &node) in self.interior_nodes.iter().enumerate() {
            let x = rhs[(i, 0)];
            if !x.is_finite() {
                return Err(Error::LinearSolve("non-finite Newton step".into()));
            }
            step[node] = x;
        }
        Ok(step)
    }

    /// `J v` from the assembled matrix, for checking the assembly.
    pub fn matrix_times(&self, mesh: &Mesh, u: &[f64], v: &[f64]) -> Vec<f64> {
        let values = self.values(mesh, u);
        let mut out = vec![0.0; u.len()];
        let mut k = 0;
        for_each_lower_entry(mesh, &self.interior_index, |row, col, _, _| {
            let (ni, nj) = (self.interior_nodes[row], self.interior_nodes[col]);
            out[ni] += values[k] * v[nj];
            if row != col {
                out[nj] += values[k] * v[ni];
            }
            k += 1;
        });
        out
    }
}

/// Visits each (triangle, local pair) contributing to the lower triangle of
/// the interior matrix, in a fixed order.
fn for_each_lower_entry(
    mesh: &Mesh,
    interior_index: &[usize],
    mut f: impl FnMut(usize, usize, (usize, usize, usize), &super::mesh::Element),
) {
    for (t, e) in mesh.elements().iter().enumerate() {
        for a in 0..3 {
            let ia = interior_index[e.nodes[a]];
            if ia == usize::MAX {
                continue;
            }
            for b in 0..3 {
                let ib = interior_index[e.nodes[b]];
                if ib == usize::MAX || ia < ib {
                    continue;
                }
                f(ia, ib, (t, a, b), e);
            }
        }
    }
}
