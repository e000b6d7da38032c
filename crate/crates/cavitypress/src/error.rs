use thiserror::Error;

/// Errors produced by the library. The CLI maps each variant to a fixed
/// exit code: parse errors 1, precondition violations 2, tolerance
/// failures 3, resource budget failures 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("tolerance exceeded: {0}")]
    Tolerance(String),
    #[error("resource budget exceeded: {0}")]
    Budget(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 1,
            Error::Precondition(_) | Error::Io(_) => 2,
            Error::Tolerance(_) => 3,
            Error::Budget(_) => 4,
        }
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
