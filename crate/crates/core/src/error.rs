use thiserror::Error;

/// Errors raised anywhere in the offline/online pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parameter {value} in coordinate {index} lies outside [1, 3]")]
    OutOfDomain { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is numerically singular (pivot {pivot:e} at row {row})")]
    SingularMatrix { row: usize, pivot: f64 },

    #[error("linear solve stagnated: relative residual {residual:e}")]
    SolverStagnation { residual: f64 },

    #[error("truth solve failed at node {index}: {source}")]
    SnapshotFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("reduced matrix is near-singular (condition estimate {condition:e}) at N = {n}")]
    NearSingular { n: usize, condition: f64 },

    #[error("node budget exceeded: {requested} nodes requested, budget is {budget}")]
    NodeBudget { requested: usize, budget: usize },

    #[error("no positive weights: {0}")]
    NoPositiveWeights(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("artifact format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable identifier used by the CLI for machine-readable failures.
    pub fn class(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::OutOfDomain { .. } => "out-of-domain",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::SingularMatrix { .. } => "singular-matrix",
            Error::SolverStagnation { .. } => "solver-stagnation",
            Error::SnapshotFailed { .. } => "snapshot-failed",
            Error::NearSingular { .. } => "near-singular",
            Error::NodeBudget { .. } => "node-budget",
            Error::NoPositiveWeights(_) => "no-positive-weights",
            Error::Unsupported(_) => "unsupported",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
