use thiserror::Error;

/// Errors raised anywhere in the discretization pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The interface resolves the mesh too poorly for the method to apply.
    #[error("interface assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("degenerate geometry: {0}")]
    GeometryDegenerate(String),

    #[error("no quadrature rule of degree {0} on the triangle (supported: 1..=5)")]
    UnsupportedDegree(usize),

    #[error("degenerate polygon with area {area:e}")]
    DegeneratePolygon { area: f64 },

    #[error("zero-length segment")]
    ZeroLengthSegment,

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("mesh sizes must be strictly decreasing: {0}")]
    NonMonotoneMeshSizes(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
