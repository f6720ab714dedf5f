//! Process-level error categories and their exit codes.

use lagdep_core::Error as CoreError;

/// Exit code 2 for problems with the invocation or its inputs, exit
/// code 1 for failures inside the analysis itself.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Analysis(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Analysis(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match &e {
            CoreError::Io(_)
            | CoreError::Csv(_)
            | CoreError::Parse { .. }
            | CoreError::NonFinite { .. }
            | CoreError::RaggedRow { .. }
            | CoreError::InvalidFormat(_) => CliError::Io(e.to_string()),
            CoreError::MissingChannel(_)
            | CoreError::DuplicateChannel(_)
            | CoreError::InvalidArgument(_) => CliError::Config(e.to_string()),
            CoreError::InsufficientData { .. }
            | CoreError::ZeroVariance { .. }
            | CoreError::InsufficientOverlap { .. }
            | CoreError::NoConvergence { .. }
            | CoreError::Pipeline { .. } => CliError::Analysis(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
