use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A precondition of an operation was not met (bad index, empty input, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Malformed input file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An exact computation would exceed its configured budget.
    #[error("budget exceeded: {what} (reached {reached}, limit {limit})")]
    BudgetExceeded {
        what: String,
        reached: u64,
        limit: u64,
    },

    /// A player broke the rules of the game.
    #[error("protocol violation at round {round}: {detail}")]
    ProtocolViolation { round: usize, detail: String },

    /// An operation that is only defined for binary label sets got a multiclass input.
    #[error("operation requires a binary class (label count {0})")]
    NotBinary(usize),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn budget(what: impl Into<String>, reached: u64, limit: u64) -> Self {
        Error::BudgetExceeded {
            what: what.into(),
            reached,
            limit,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
