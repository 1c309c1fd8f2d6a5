use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error at column {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("jet order {order} exceeds the configured bound {bound}")]
    JetOrderExceeded { order: usize, bound: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a total divergence; Euler fingerprint {fingerprint}")]
    NotTotalDivergence { fingerprint: String },
    #[error("covector is not variational: {0}")]
    NotVariational(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("operator shape error: {0}")]
    Shape(String),
    #[error("ansatz violated: {0}")]
    AnsatzViolation(String),
    #[error("no solution in the search space; residual {residual}")]
    NoSolution { residual: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
