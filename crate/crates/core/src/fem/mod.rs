//! Piecewise linear finite elements for the planar problem.

mod assembly;
mod comparison;
mod mesh;
mod solver;

pub use assembly::{apply_jacobian, assemble_residual, max_gradient, NewtonSystem};
pub use comparison::{
    tube_barriers, verify_comparison, BarrierField, BarrierKind, ComparisonReport, Violation,
};
pub use mesh::{mesh_annulus, Element, Mesh, NodeTag, DEFAULT_AREA_FLOOR};
pub use solver::{
    boundary_data, continuation_solve, ContinuationFailure, ContinuationStep, ContinuationTrace,
    SolutionField, SolverConfig,
};
