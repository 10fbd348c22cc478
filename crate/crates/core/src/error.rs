use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("degenerate hypergraph: n = {n} < k = {k}")]
    Degenerate { n: usize, k: usize },

    #[error("invalid edge {edge:?}: {reason}")]
    InvalidEdge { edge: Vec<usize>, reason: String },

    #[error("duplicate edge {0:?}")]
    DuplicateEdge(Vec<usize>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("oracle out of budget: {0}")]
    OracleBudget(String),

    /// A desk-scale stage could not meet its guarantee; callers fall back.
    #[error("pipeline failure in {stage}: {reason}")]
    Pipeline { stage: &'static str, reason: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("json: {0}")]
    Json(String),
}

impl Error {
    pub(crate) fn pipeline(stage: &'static str, reason: impl Into<String>) -> Self {
        Error::Pipeline {
            stage,
            reason: reason.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
