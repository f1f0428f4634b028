use thiserror::Error;

use crate::solver::IterationRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("measure needs at least 3 distinct normals, got {0}")]
    TooFewNormals(usize),

    #[error("weight {index} is not a positive finite number ({value})")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("normals are concentrated on a closed half-circle (max angular gap {max_gap})")]
    HemisphereViolation { max_gap: f64 },

    #[error("halfplane intersection has empty interior")]
    EmptyInterior,

    #[error("halfplane intersection is unbounded")]
    Unbounded,

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("linear solver stalled at relative residual {residual:e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },

    #[error("{identity} identity violated: relative gap {gap:e} exceeds {tolerance:e}")]
    IdentityMismatch {
        identity: &'static str,
        gap: f64,
        tolerance: f64,
    },

    #[error("facet {index} has zero support number but positive torsion measure")]
    OriginOnBoundary { index: usize },

    #[error("measure normal {index} has no facet on the polygon")]
    MissingFacet { index: usize },

    #[error("p equals n+2 = 4; the original (unnormalized) problem is undefined there")]
    PCritical,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxItersExceeded {
        iterations: usize,
        residual: f64,
        history: Vec<IterationRecord>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
