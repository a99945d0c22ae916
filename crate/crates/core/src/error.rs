use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("node count {0} below minimum 8")]
    TooFewNodes(usize),
    #[error("non-finite sample at node {0}")]
    NonFinite(usize),
    #[error("incompatible functions: {0}")]
    Incompatible(String),
    #[error("no convergence: {what} (residual {residual:e})")]
    NoConvergence { what: String, residual: f64 },
    #[error("linear solver failure: {0}")]
    Solver(String),
    #[error("stability limit exceeded: {0}")]
    Stability(String),
}

pub type Result<T> = std::result::Result<T, Error>;
