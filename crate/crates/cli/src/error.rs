use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use hls_core::HlsError;

#[derive(Debug)]
pub enum CliError {
    /// Bad parameters or input content: exit code 2.
    Validation(String),
    /// Unreadable or malformed input, unwritable output: exit code 3.
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(2),
            CliError::Io(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Io(msg) => f.write_str(msg),
        }
    }
}

impl From<HlsError> for CliError {
    fn from(e: HlsError) -> Self {
        CliError::Validation(e.to_string())
    }
}
