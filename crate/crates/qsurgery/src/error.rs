use thiserror::Error;

/// Errors shared by every module.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed text input. `line` is 1-based, 0 when unknown.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// Input violates a documented precondition.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// Circuit, partition and block map do not fit together.
    #[error("incompatible: {0}")]
    Incompatible(String),
    /// Problem size exceeds a configured cap.
    #[error("refused: {0}")]
    CapExceeded(String),
    /// A randomized construction ran out of retries.
    #[error("retry budget exhausted: {0}")]
    BudgetExhausted(String),
    /// The requested measurement is outside what the system supports.
    #[error("capability: {0}")]
    Capability(String),
    /// Filesystem or serialization failure.
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Invalid(_) | Error::Incompatible(_) | Error::Capability(_) => 2,
            Error::CapExceeded(_) => 3,
            Error::BudgetExhausted(_) | Error::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
