use std::path::PathBuf;

use thiserror::Error;

use crate::generators::GeneratorError;
use crate::scoring::ScoringError;

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("config: {0}")]
    Config(String),
    #[error("input {path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("model {id}: {source}")]
    Generator { id: String, source: GeneratorError },
}

impl OrchestratorError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> OrchestratorError {
        OrchestratorError::Io { path: path.into(), source }
    }

    pub fn input(path: impl Into<PathBuf>, message: impl Into<String>) -> OrchestratorError {
        OrchestratorError::Input { path: path.into(), message: message.into() }
    }

    /// Process exit status: 1 runtime, 2 config or missing file, 3 input format.
    pub fn exit_code(&self) -> i32 {
        match self {
            OrchestratorError::Config(_) | OrchestratorError::Scoring(ScoringError::InvalidWeights(_) | ScoringError::UnknownField(_)) => 2,
            OrchestratorError::Input { .. } => 3,
            OrchestratorError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 2,
            OrchestratorError::Io { source, .. } if source.kind() == std::io::ErrorKind::InvalidData => 3,
            _ => 1,
        }
    }
}
