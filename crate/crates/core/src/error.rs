use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("charge parameter q = {0} is outside [0, 0.25]")]
    InvalidCharge(f64),

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1}); multi-edges are not supported")]
    DuplicateEdge(usize, usize),

    #[error("node index {index} out of range for a graph with {n_nodes} nodes")]
    NodeOutOfRange { index: usize, n_nodes: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("matrix is not Hermitian (max |L - L*| = {0:e})")]
    NotHermitian(f64),

    #[error("Hermitian eigensolver failed to converge")]
    ConvergenceFailure,

    #[error("unknown filter bank '{0}'")]
    UnknownBank(String),

    #[error("filter bank '{0}' is a quasi-framelet bank and defines no scaling function")]
    NotMraBank(&'static str),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("class {class} has {count} members, {required} required")]
    InsufficientClassMembers {
        class: usize,
        count: usize,
        required: usize,
    },

    #[error("too few nodes for the split: {0}")]
    SplitTooSmall(String),

    #[error("could not find an edge split keeping every node covered after {0} attempts")]
    RetryExhausted(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_mismatch(expected: impl ToString, actual: impl ToString) -> Error {
    Error::ShapeMismatch {
        expected: expected.to_string(),
        actual: actual.to_string(),
    }
}
