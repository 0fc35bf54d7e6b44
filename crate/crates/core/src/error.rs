use thiserror::Error;

/// Library-wide error type.
///
/// The three non-IO variants map onto the CLI exit codes: input-format
/// problems (2), contract violations such as too-short series or
/// single-class training data (3), and internal invariant failures (4).
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed external data: unparseable files, bad payload shapes.
    #[error("{0}")]
    Input(String),

    /// A precondition of an operation was violated by otherwise
    /// well-formed data.
    #[error("{0}")]
    Contract(String),

    /// An internal invariant failed; indicates a bug, not bad input.
    #[error("{0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Input(format!("CSV error: {e}"))
    }
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
