use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed domain: {0}")]
    MalformedDomain(String),

    /// Zero boundary curvature (`H_inf ≥ 0`): the closed forms degenerate.
    #[error("degenerate boundary curvature: {0}")]
    Degenerate(String),

    #[error("mean curvature H = {h} is outside [0, C) with C = {c}")]
    CurvatureOutOfRange { h: f64, c: f64 },

    #[error("s = {s} lies outside the barrier interval [0, {epsilon}]")]
    OutsideBarrierInterval { s: f64, epsilon: f64 },

    #[error("s = {s} is not below the reach {reach} of {component}")]
    OutOfReach {
        s: f64,
        reach: f64,
        component: String,
    },

    #[error("point ({x}, {y}) lies outside the closed domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("no spherical cap graph: H·R = {0} exceeds 1")]
    CapDoesNotExist(f64),

    #[error(
        "barrier width {epsilon} exceeds the reach {reach} of {component}; use a smaller λ − α gap"
    )]
    ReachTooSmall {
        epsilon: f64,
        reach: f64,
        component: String,
    },

    #[error("quadrature did not converge on [{a}, {b}] (estimated error {error})")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
