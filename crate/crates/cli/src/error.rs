use std::fmt;

/// Command failure, mapped onto the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad configuration or flag value (exit 2).
    Config(String),
    /// Reading or writing a file failed (exit 3).
    Io(String),
    /// A computation violated an internal invariant (exit 4).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub(crate) fn config(e: gravchan_core::Error) -> Self {
        CliError::Config(e.to_string())
    }

    pub(crate) fn internal(e: gravchan_core::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
