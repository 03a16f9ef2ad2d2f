use std::path::{Path, PathBuf};

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: aeronet::Error,
    },

    #[error("{context}: {source}")]
    Csv {
        context: String,
        #[source]
        source: csv::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    /// Failure inside one pipeline stage.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CliError>,
    },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn file(path: &Path, source: std::io::Error) -> Self {
        CliError::File { path: path.to_path_buf(), source }
    }

    /// Stable machine-readable class of the error.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::File { .. } => "io",
            CliError::Csv { .. } => "parse",
            CliError::Json { .. } => "parse",
            CliError::Stage { source, .. } => source.kind(),
            CliError::Core { source, .. } => match source {
                aeronet::Error::InvalidInput(_) => "invalid_input",
                aeronet::Error::InvalidScenario(_) => "invalid_scenario",
                aeronet::Error::InvalidPath(_) => "invalid_path",
                aeronet::Error::InfeasibleDemand(_) => "infeasible_demand",
                aeronet::Error::InfeasibleDeployment { .. } => "infeasible_deployment",
                aeronet::Error::Parse { .. } | aeronet::Error::Csv(_) | aeronet::Error::Json(_) => "parse",
                aeronet::Error::Schema(_) => "schema",
                aeronet::Error::Io(_) => "io",
            },
        }
    }

    pub fn stage(&self) -> Option<&'static str> {
        match self {
            CliError::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "stage": self.stage(), "message": self.to_string() } })
    }
}

/// Attaches a human context to core, CSV and JSON errors.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for aeronet::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|source| CliError::Core { context: what(), source })
    }
}

impl<T> Context<T> for Result<T, csv::Error> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|source| CliError::Csv { context: what(), source })
    }
}

impl<T> Context<T> for Result<T, serde_json::Error> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|source| CliError::Json { context: what(), source })
    }
}
