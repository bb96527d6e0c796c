//! Explicit height bounds, barrier certification and numerical solvers for
//! graphs of constant mean curvature over multiply connected domains.
//!
//! The Dirichlet problem is
//!
//! ```text
//!   div( ∇u / sqrt(1 + |∇u|²) ) + n H = 0   in Ω = Λ \ (Λ̄_1 ∪ … ∪ Λ̄_m)
//!   u = 0 on Γ = ∂Λ,   u = h on every Γ_i = ∂Λ_i
//! ```
//!
//! Modules:
//!
//! - [`constants`]: the universal constant δ and every closed-form bound
//!   (minimal case height, the CMC constant `C`, the CMC height `h_H`, and
//!   the injectivity radius comparison bound).
//! - [`geometry`]: circular multiply connected domains, reach, boundary
//!   curvature and exact Laplacians of the distance function.
//! - [`barriers`]: the `ψ_{α,λ}` supersolution family and its certification.
//! - [`radial`]: exact rotationally symmetric solutions via the first integral.
//! - [`fem`]: P1 finite elements with damped Newton and continuation in `t`.
//! - [`report`]: the aggregated bounds report for a domain.

pub mod barriers;
pub mod constants;
mod error;
pub mod fem;
pub mod geometry;
mod quad;
pub mod radial;
pub mod report;

pub use error::{Error, Result};
