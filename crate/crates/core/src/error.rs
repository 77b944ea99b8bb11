use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A fallback would have to scan more integers than allowed.
    #[error("enumeration of {requested} integers exceeds the cap of {cap}")]
    EnumerationCapExceeded { requested: u64, cap: u64 },

    #[error("value outside the admissible domain: {0}")]
    Domain(String),

    #[error("invalid set description: {0}")]
    InvalidSet(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid estimator configuration: {0}")]
    InvalidConfig(String),

    #[error("sets are not disjoint: {witness} belongs to both")]
    DisjointnessViolation { witness: u64 },

    #[error("set {0} has no density derivable from its structure")]
    MissingDensity(String),

    #[error("syntax error at {line}:{column} near `{token}`: {message}")]
    Syntax {
        line: usize,
        column: usize,
        token: String,
        message: String,
    },

    #[error("semantic error at {line}:{column}: {message}")]
    Semantic {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub fn is_parse_error(&self) -> bool {
        matches!(self, Error::Syntax { .. } | Error::Semantic { .. })
    }
}
