use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BenchmarkError {
    #[error("k must be between 1 and the batch size {len}, got {k}")]
    InvalidK { k: usize, len: usize },
}
