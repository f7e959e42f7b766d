use thiserror::Error;

use crate::dynamic::DynamicEquilibrium;

pub type Result<T, E = EqError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum EqError {
    #[error("negative load {0} passed to a utility function")]
    NegativeLoad(f64),

    #[error("agent {agent} has a non-concave or malformed utility")]
    NonConcaveUtility { agent: usize },

    #[error("negative local resource a = {value} for agent {agent}")]
    NegativeResource { agent: usize, value: f64 },

    #[error("no finite price clears the market (capacity {capacity})")]
    InfeasibleBalance { capacity: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("agent {agent} has zero curvature; closed-form price undefined")]
    ZeroCurvature { agent: usize },

    #[error("k is not below k' componentwise (index {index})")]
    PartialOrderViolated { index: usize },

    #[error("price iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        residual: f64,
        iterations: usize,
        last: Box<DynamicEquilibrium>,
    },

    #[error("total supply at step {step} is not positive")]
    InfeasibleScenario { step: usize },

    #[error("best-response system of agent {agent} is not negative definite")]
    SingularSystem { agent: usize },

    #[error("grid has {cells} cells, limit is {limit}")]
    GridTooLarge { cells: f64, limit: f64 },

    #[error("point violates the balance constraint by {residual:.3e}")]
    InfeasiblePoint { residual: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("schema error in {path}: {source}")]
    Schema {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
