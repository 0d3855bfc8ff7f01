use thiserror::Error;

use crate::scalar::Scalar;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("argument outside [-1, 1]: {0}")]
    OutOfDomain(Scalar),

    #[error("target not convex: {0}")]
    NotConvex(String),

    #[error("singular linear system ({0})")]
    Singular(String),

    /// The iteration budget ran out; carries the best bracket seen so far.
    #[error("no convergence after {iterations} iterations, best bracket [{lower}, {upper}]")]
    NoConvergence {
        iterations: usize,
        lower: Scalar,
        upper: Scalar,
    },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}
