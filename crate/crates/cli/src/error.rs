use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config files or parameter combinations.
    #[error("configuration error: {0}")]
    Config(String),

    /// The simulation produced a state or record that failed its checks.
    #[error("{0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Io(_) => ExitCode::from(1),
            CliError::Config(_) => ExitCode::from(2),
            CliError::Invariant(_) => ExitCode::from(3),
        }
    }
}

impl From<qbcharge::Error> for CliError {
    fn from(e: qbcharge::Error) -> Self {
        use qbcharge::Error as E;
        match e {
            E::Domain(_) | E::DimensionMismatch { .. } | E::UnsupportedModel { .. } => CliError::Config(e.to_string()),
            E::InvariantViolation(_) | E::Numerical(_) => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}
