//! CLI-side error wrapper: library errors plus configuration problems.

use std::fmt;

/// Either a library error or a CLI configuration problem.
#[derive(Debug)]
pub enum CliError {
    Core(tabletitle::Error),
    /// Bad config-file entry, flag value, or input-layout problem.
    Config(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// Stable short name used in `error[Name]: message` diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.name(),
            CliError::Config(_) => "Config",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Config(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<tabletitle::Error> for CliError {
    fn from(e: tabletitle::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(tabletitle::Error::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(tabletitle::Error::Json(e))
    }
}
