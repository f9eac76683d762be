//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unbounded in direction of optimization")]
    UnboundedDirection,
    #[error("coupled set is empty")]
    EmptyCoupledSet,
    #[error("Fourier-Motzkin row blowup: {rows} intermediate rows exceeds cap {cap}")]
    ProjectionBlowup { rows: usize, cap: usize },
    #[error("set is not contained in the nonnegative orthant")]
    NotInNonnegativeOrthant,
    #[error("polyhedron is unbounded")]
    UnboundedPolyhedron,
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCapExceeded { dim: usize, cap: usize },
    #[error("set does not contain the origin")]
    OriginNotContained,
    #[error("set has empty interior")]
    EmptyInterior,
    #[error("nesting violated: inner set is not contained in outer set (witness {witness:?})")]
    NotNested { witness: Vec<f64> },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("theorem assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("robust counterpart requires polyhedral atoms; found an l2 ball")]
    NonPolyhedralAtomInRc,
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("inner maximization stagnated")]
    InnerStagnation,
    #[error("vertex count {count} exceeds budget {budget}")]
    VertexBudgetExceeded { count: usize, budget: usize },
    #[error("unsupported method {method} for this problem family: {reason}")]
    UnsupportedMethod { method: String, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
