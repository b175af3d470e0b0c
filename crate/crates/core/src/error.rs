use thiserror::Error;

/// Errors shared by every module of the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical conditioning: {0}")]
    Conditioning(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch(_) | Error::Precondition(_) | Error::Parse(_) => 2,
            Error::Conditioning(_) | Error::Estimation(_) => 3,
            Error::Internal(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::Precondition(_) => "precondition",
            Error::Conditioning(_) => "conditioning",
            Error::Estimation(_) => "estimation",
            Error::Parse(_) => "parse",
            Error::Internal(_) => "internal",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
