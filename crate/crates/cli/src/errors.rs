//! CLI error classification: user/input problems exit 2, internal bugs 1.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, missing files, malformed or degenerate input
    /// data. The process exits with status 2.
    User(String),
    /// Failures that indicate a bug (e.g. serializing our own artifacts).
    /// The process exits with status 1.
    Internal(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::User(m) => write!(f, "{m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

// Library errors all describe problems with user-supplied data or
// parameters; genuine bugs surface as panics instead.
impl From<semprune::Error> for CliError {
    fn from(e: semprune::Error) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::User(e.to_string())
    }
}
