use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: relation `{symbol}` has arity {expected}, got {found} entries")]
    ArityMismatch {
        line: usize,
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: unknown element `{element}`")]
    UnknownElement { line: usize, element: String },

    #[error("line {line}: unknown relation `{symbol}`")]
    UnknownSymbol { line: usize, symbol: String },

    #[error("line {line}: duplicate {what} `{name}`")]
    Duplicate {
        line: usize,
        what: &'static str,
        name: String,
    },

    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),

    #[error("assignment out of range: {0}")]
    Domain(String),

    #[error("not a homomorphism: {0}")]
    NotAHomomorphism(String),

    #[error("tree width exceeds {k}")]
    WidthExceeded { k: usize },

    #[error("graph with {vertices} vertices is too large for exact tree width; supply a decomposition")]
    DecompositionTooLarge { vertices: usize },

    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("invalid endomorphism sequence ({condition}): {detail}")]
    InvalidSequence {
        condition: &'static str,
        detail: String,
    },

    #[error("invalid projection: {0}")]
    InvalidProjection(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn sequence(condition: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidSequence {
            condition,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
