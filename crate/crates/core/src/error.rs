use thiserror::Error;

/// Failure to evaluate a scalar field at a point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("{field}: expected a point in C^{expected}, got C^{got}")]
    DimensionMismatch {
        field: String,
        expected: usize,
        got: usize,
    },
    #[error("{0}: non-finite coordinate")]
    NonFinite(String),
    #[error("{field}: point lies within {distance:.3e} of the singular locus (exclusion radius {eps:.1e})")]
    ExclusionTube {
        field: String,
        distance: f64,
        eps: f64,
    },
    #[error("{field}: point lies outside the neighborhood U where the field is defined")]
    OutsideNeighborhood { field: String },
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("finite-difference stencil for {field} leaves its smooth domain: {source}")]
    StencilLeavesDomain {
        field: String,
        #[source]
        source: FieldError,
    },
    #[error("matrix has non-finite entries")]
    NonFiniteMatrix,
    #[error("invalid model parameters: {0}")]
    Params(String),
    #[error("degenerate eigenvector: {0}")]
    DegenerateVector(String),
    #[error("search infeasible: {0}")]
    Infeasible(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("curve rejected: {0}")]
    InvalidCurve(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
