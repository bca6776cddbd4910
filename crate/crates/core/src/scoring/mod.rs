//! 2D scoring and filter modules, and the composite reward built from them.

pub mod cluster;
pub mod druglike;
pub mod error;
pub mod flex;
pub mod mce18;
pub mod mcf;
pub mod morph;
pub mod novelty;
pub mod privileged;
pub mod report;
pub mod rersa;
pub mod reward;
pub mod ro5;
pub mod som;
pub mod tindex;

pub use cluster::{butina, neighbor_lists, Clustering};
pub use druglike::{drug_likeness, DrugLikenessRules, DrugRule};
pub use error::ScoringError;
pub use flex::flex;
pub use mce18::{mce18, mce18_terms, Mce18Terms};
pub use mcf::{mcf_screen, McfRule, McfRuleSet, McfVerdict, Severity};
pub use morph::{morph, MorphMode, MorphOutcome, MorphRule, MorphRules, Variant};
pub use novelty::{novelty, NoveltyScore, ReferenceIndex};
pub use privileged::{pf_mine, pf_score, PfScore, PfSet, PrivilegedFragment};
pub use report::{parse_modules, shipped_fragment_stats, Module, ScoreReport, ScoringContext, SomModel};
pub use rersa::{rersa, rersa_parts, FragmentStats, RersaConfig, RersaParts};
pub use reward::{reward, Component, Gates, Range, RewardWeights};
pub use ro5::{ro5, ro5_with, Ro5Result};
pub use som::{som_classify, som_train, zoom_refine, Scaler, SomClass, SomConfig, SomGrid};
pub use tindex::{t_index, TIndexConfig, TIndexResult};
