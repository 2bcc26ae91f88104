//! File formats, run specifications, a threaded try executor and the
//! command implementations behind the `ldod` binary.

pub mod commands;
pub mod csvio;
pub mod exec;
pub mod spec;

use ldod_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// Every try failed, or another runtime failure.
    pub const FAILURE: u8 = 1;
    pub const VALIDATION: u8 = 2;
    pub const SINGULAR: u8 = 3;
    pub const NON_CONVERGENCE: u8 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: unreadable or malformed files, inconsistent settings.
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Singular(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Validation(_) => exit::VALIDATION,
            Self::Singular(_) => exit::SINGULAR,
            Self::NonConvergence(_) => exit::NON_CONVERGENCE,
            Self::Failure(_) => exit::FAILURE,
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Self::Validation(msg.into())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Singular => Self::Singular(e.to_string()),
            CoreError::AllTriesFailed | CoreError::NoNonsingularStart(_) | CoreError::Eval { .. } => {
                Self::Failure(e.to_string())
            }
            CoreError::Dimension(_) | CoreError::Design(_) | CoreError::Config(_) => Self::Validation(e.to_string()),
        }
    }
}

impl From<ldod_core::DesignError> for CliError {
    fn from(e: ldod_core::DesignError) -> Self {
        Self::Validation(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
