use thiserror::Error;

/// Errors raised by the solvers, bound evaluators and sweep drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Mismatched or malformed arguments (wrong length, bad ordering, ...).
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A configured computational budget would be exceeded.
    #[error("resource budget exceeded: {0}")]
    Resource(String),
    /// Bad run configuration (flags or config file).
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
