use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Stream metadata or chunk shape violates an invariant.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("source_id {0:?} is already advertised on this host")]
    DuplicateSource(String),

    #[error("framing error: {0}")]
    Framing(String),

    /// The peer closed the connection or the socket failed.
    #[error("connection lost: {0}")]
    Disconnected(String),

    #[error("timed out after {0:.3} s")]
    Timeout(f64),

    #[error(transparent)]
    Io(#[from] io::Error),
}
