use std::fmt;

/// Errors surfaced by the library.
#[derive(Debug)]
pub enum Error {
    /// An argument was outside the mathematical domain of the operation.
    Domain(String),
    /// A correlation matrix failed the positive-definiteness check.
    NotPositiveDefinite,
    /// Configuration file or flag parsing failed.
    Config(String),
    /// A stored parameter file does not match the configured flow layout.
    LayoutMismatch(String),
    /// The requested operation is not implemented for this family/dimension.
    Unsupported(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NotPositiveDefinite => {
                write!(f, "correlation matrix is not positive definite")
            }
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::LayoutMismatch(msg) => write!(f, "parameter layout mismatch: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::Io(err) => write!(f, "io error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
