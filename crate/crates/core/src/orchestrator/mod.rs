//! Experiment orchestration: configuration, the epoch loop over an ensemble
//! of generators, ranking, reports and resumable checkpoints.

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod input;
pub mod rank;
pub mod run;

pub use checkpoint::{derive_seed, Manifest};
pub use config::{default_models, Budgets, ExperimentConfig, Mode, ModelKind, ModelSpec, SomSpec};
pub use error::OrchestratorError;
pub use input::{parse_records, read_molecules, read_records, InputRecord};
pub use rank::{rank, rank_score, RankKey};
pub use run::{
    build_context, build_models, model_stats, ranked_csv, screen, DedupStats, EpochStats, Experiment, ExperimentResult, Incident,
    ModelTimeline, RankedCandidate, RunOptions, StopReason, TOP_K,
};
