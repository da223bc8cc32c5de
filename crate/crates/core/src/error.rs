use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid number {0:?}")]
    Number(String),

    /// A model, automaton, or strategy violates a structural invariant.
    #[error("{0}")]
    Invalid(String),

    #[error("unknown {kind} {name:?}")]
    Unknown { kind: &'static str, name: String },

    #[error("automaton reads propositions {missing:?} that the model does not declare")]
    AlphabetMismatch { missing: Vec<String> },

    #[error("property {0:?} has no declared complement")]
    MissingComplement(String),

    #[error("{what} exceeds the configured cap ({limit})")]
    CapExceeded { what: String, limit: u64 },

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn unknown(kind: &'static str, name: impl Into<String>) -> Self {
        Error::Unknown {
            kind,
            name: name.into(),
        }
    }
}
