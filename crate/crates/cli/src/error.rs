use thiserror::Error;

/// Front-end failures, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: row {row}: {reason}")]
    Parse {
        path: String,
        row: usize,
        reason: String,
    },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] rieopt::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 2 for bad invocations or inputs, 3 for numeric and domain failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => 2,
            CliError::Core(rieopt::Error::InvalidArgument(_)) => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) | CliError::Csv(_) => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
