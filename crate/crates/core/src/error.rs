use thiserror::Error;

/// Errors produced by the relay-network library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("network must have at least one relay")]
    NoRelays,

    #[error("invalid network: {field} {reason}")]
    Validation { field: String, reason: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid list: {0}")]
    List(String),

    #[error("relay index {index} out of range 1..={relays}")]
    RelayIndex { index: usize, relays: usize },

    #[error("amplification vector has length {got}, network has {expected} relays")]
    BetaLength { expected: usize, got: usize },

    #[error("a relay's own echo is subtracted before forwarding; origin must differ from relay {0}")]
    OwnEcho(usize),

    #[error("block length {n} must exceed the source delay spread {spread}")]
    BlockLength { n: usize, spread: usize },

    #[error("closed form undefined: {0}")]
    ClosedForm(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("non-finite integrand at lambda = {0}")]
    NonFinite(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
