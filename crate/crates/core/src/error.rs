use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its valid range (bands, rates, specs).
    #[error("configuration error: {0}")]
    Config(String),

    /// Input violates an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A request was refused (unknown ids, duplicates, bad documents).
    #[error("{0}")]
    Rejected(String),

    /// A recording or document failed to parse at a given line.
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Transport(#[from] tobe_transport::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn rejected(msg: impl Into<String>) -> Self {
        Error::Rejected(msg.into())
    }
}
