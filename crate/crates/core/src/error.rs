use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("region is empty")]
    EmptyRegion,

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("radius {radius} exceeds the truncation horizon {horizon}")]
    BeyondHorizon { radius: f64, horizon: f64 },

    #[error("mesh too coarse: edge {edge} has cell size {cell_size}, need at most {required} (8 cells per cutoff width)")]
    MeshTooCoarse {
        edge: String,
        cell_size: f64,
        required: f64,
    },

    #[error("factorization failed in {stage} at pivot {pivot}; {hint}")]
    Factorization {
        stage: &'static str,
        pivot: usize,
        hint: String,
    },

    #[error("no convergence after {iterations} iterations; achieved residuals {residuals:?}")]
    NonConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("matching conditions violated: {0}")]
    Infeasible(String),

    #[error("seeds produce the zero solution")]
    ZeroSolution,

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
