use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{field} must be at least 1")]
    NotPositive { field: &'static str },
    #[error("{field} is not finite: {value}")]
    NotFinite { field: &'static str, value: f64 },
    #[error("{field} must be non-negative, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("gamma must lie in [0, 1), got {0}")]
    Gamma(f64),
    #[error("{0} grid is empty")]
    EmptyGrid(&'static str),
    #[error(transparent)]
    Core(#[from] baird_core::Error),
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot aggregate: {0}")]
    Aggregate(String),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    /// Process exit code: 2 for configuration problems, 3 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Parse { .. } | LabError::Aggregate(_) => 2,
            LabError::Io { .. } | LabError::Csv(_) | LabError::Json(_) => 3,
        }
    }
}
