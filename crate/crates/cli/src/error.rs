use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("runtime: {0}")]
    Runtime(#[from] surfvortex_core::Error),
    #[error("output: {0}")]
    Output(String),
    #[error("validation failed: {}", .0.join(", "))]
    Validation(Vec<String>),
}

/// Machine-readable form written to stderr and `error.json`.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub exit_code: u8,
    pub message: String,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::Output(_) => 3,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            kind: match self {
                CliError::Config(_) => "config",
                CliError::Runtime(_) => "runtime",
                CliError::Output(_) => "output",
                CliError::Validation(_) => "validation",
            },
            exit_code: self.exit_code(),
            message: self.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
