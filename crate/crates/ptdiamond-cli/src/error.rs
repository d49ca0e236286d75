//! Process-level error classification and exit codes.

use std::fmt;

/// Exit code on success.
pub const EXIT_OK: i32 = 0;
/// Exit code for configuration/validation problems (bad flags, bad config
/// files, physically invalid parameters).
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code for failures during compute or output (linear algebra,
/// integration, I/O).
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit code when a propagation run hit the overflow cap. Partial outputs
/// are still written.
pub const EXIT_BLOWUP: i32 = 4;

/// Anything that aborts a command.
#[derive(Debug)]
pub enum AppError {
    /// The request itself is invalid; nothing was computed.
    Validation(String),
    /// The run failed while computing or writing results.
    Runtime(String),
}

impl AppError {
    pub fn validation(msg: impl Into<String>) -> Self {
        AppError::Validation(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Validation(_) => EXIT_VALIDATION,
            AppError::Runtime(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Validation(m) => write!(f, "validation error: {m}"),
            AppError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl From<ptdiamond::Error> for AppError {
    fn from(e: ptdiamond::Error) -> Self {
        use ptdiamond::Error as E;
        match e {
            E::Validation(_) | E::TiltedBloch { .. } | E::ClsMismatch(_) | E::OracleSize { .. } => {
                AppError::Validation(e.to_string())
            }
            E::IntegrationFailure { .. } | E::CrossValidation { .. } | E::Linalg(_) => {
                AppError::Runtime(e.to_string())
            }
        }
    }
}

/// Wraps an I/O error with the path it concerns.
pub fn io_err(path: &std::path::Path, e: std::io::Error) -> AppError {
    AppError::Runtime(format!("{}: {e}", path.display()))
}

pub type Result<T> = std::result::Result<T, AppError>;
