use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: must be finite and strictly positive")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("u = {u} lies outside the domain of C (requires 0 < u < 1 and G(u) > 0)")]
    Domain { u: f64 },

    #[error("limit system undefined: {0}")]
    LimitDomain(String),

    #[error("no positive predator level at u = {u}: c*phi1(u) <= d")]
    NoPositivePredator { u: f64 },

    #[error("j_max = {j_max} does not pass the Det Q vertex at mu = {vertex}")]
    InsufficientModes { j_max: usize, vertex: f64 },

    #[error("mode {j} (mu = {mu}) sits on the boundary of the instability band")]
    EigenvalueOnBandBoundary { j: usize, mu: f64 },

    #[error("grid needs at least 16 nodes and positive length (n = {n}, L = {length})")]
    InvalidGrid { n: usize, length: f64 },

    #[error("initial data not strictly positive at node {node}")]
    NonpositiveInitialData { node: usize },

    #[error("field not strictly positive at node {node}")]
    NonpositiveField { node: usize },

    #[error("time step {dt} rejected: {reason}")]
    StepRejected { dt: f64, reason: String },

    #[error("non-finite values at t = {t}")]
    Blowup { t: f64 },

    #[error("Newton failed after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian block at node {node}")]
    SingularJacobian { node: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
