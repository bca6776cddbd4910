use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("training corpus has no valid molecules ({skipped} lines skipped)")]
    EmptyCorpus { skipped: usize },
    #[error("no valid seed molecules")]
    NoValidSeeds,
    #[error("fragment library is empty after fragmentation")]
    EmptyLibrary,
    #[error("n-gram order {0} outside 2..=8")]
    InvalidOrder(usize),
    #[error("temperature must be positive and finite, got {0}")]
    InvalidTemperature(f64),
    #[error("invalid generator setting: {0}")]
    InvalidConfig(String),
    #[error("model has not been trained")]
    Untrained,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
