use thiserror::Error;

/// Errors raised by the solvers and their supporting machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {x} lies outside [0, 1]")]
    Domain { x: f64 },

    #[error("invalid potential: {0}")]
    Spec(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("compute budget exceeded: {requested} kernel evaluations requested, limit {limit}")]
    Budget { requested: u128, limit: u128 },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("inverse iteration did not converge: {0}")]
    Convergence(String),

    #[error("size guard violated: {0}")]
    Guard(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
