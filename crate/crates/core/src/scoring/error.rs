use thiserror::Error;

use crate::molgraph::{ChemError, RuleError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoringError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Chem(#[from] ChemError),
    #[error("rule table {0} has no rules")]
    EmptyRules(String),
    #[error("fragment statistics are empty")]
    EmptyCorpusStats,
    #[error("input is empty")]
    EmptyInput,
    #[error("vector dimension {found} does not match {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{vectors} vectors but {labels} labels")]
    LabelMismatch { vectors: usize, labels: usize },
    #[error("grid has not been trained")]
    UntrainedGrid,
    #[error("invalid reward weights: {0}")]
    InvalidWeights(String),
    #[error("unknown score field {0:?}")]
    UnknownField(String),
    #[error("{0}")]
    Parse(String),
}
