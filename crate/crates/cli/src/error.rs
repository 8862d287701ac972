use std::fmt;

use hmsim_core::Error as CoreError;

/// Failure classes, each with its own process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or unreadable path.
    Usage(String),
    /// Input file parsed but violates its schema or a domain invariant.
    Schema(String),
    /// Something that valid input should never trigger.
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Schema(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Schema(m) => write!(f, "invalid input: {m}"),
            CliError::Invariant(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(e) => CliError::Usage(e.to_string()),
            CoreError::Zero(_) | CoreError::Unprovisioned(_) => CliError::Invariant(e.to_string()),
            other => CliError::Schema(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
