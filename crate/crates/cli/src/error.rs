use std::fmt;
use std::process::ExitCode;

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum CliError {
    /// A check ran and found a violation (exit 1).
    Verification(String),
    /// Bad flags, unreadable or malformed files, infeasible parameters (exit 2).
    Invalid(String),
    /// A solver refused to run past its node or time guard (exit 3).
    Guard(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Verification(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Guard(_) => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Guard(m) => write!(f, "guard exceeded: {m}"),
        }
    }
}

impl From<multipeak::Error> for CliError {
    fn from(e: multipeak::Error) -> Self {
        match e {
            multipeak::Error::GuardExceeded { .. } => CliError::Guard(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
