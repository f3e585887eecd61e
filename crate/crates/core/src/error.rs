use thiserror::Error;

/// Errors produced by the forward model, quadrature, and optimization layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate element {id}: measure {measure:.3e} is below 1e-12")]
    DegenerateElement { id: usize, measure: f64 },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid sensor {index}: {reason}")]
    InvalidSensor { index: usize, reason: String },

    #[error("quadrature order must be at least 1")]
    InvalidOrder,

    #[error("tensor grid with {size} nodes exceeds the cap of {cap}")]
    GridTooLarge { size: u128, cap: usize },

    #[error("all measured sensor values are zero; local weights are undefined")]
    AllZeroMeasurements,

    #[error("line search failed after {0} backtracks")]
    LineSearchFailed(usize),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh file line {line}: {reason}")]
    MeshParse { line: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
