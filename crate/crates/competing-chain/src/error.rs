use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {dim} exceeds the configured cap {cap}")]
    Size { dim: usize, cap: usize },

    #[error("invalid parameter `{key}`: {reason}")]
    Parameter { key: String, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("evaluation at a pole: {0}")]
    Evaluation(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("degenerate eigenvalue: {0}")]
    Degeneracy(String),

    #[error("polynomial fit failed: {0}")]
    Fit(String),

    #[error("root extraction failed: {0}")]
    Extraction(String),

    #[error("solver did not converge after {iterations} iterations (best residual {best_residual:e})")]
    Solver {
        iterations: usize,
        best_residual: f64,
        best_iterate: Vec<f64>,
        history: Vec<f64>,
    },

    #[error("quantity diverges: {0}")]
    Divergence(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn param(key: &str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
