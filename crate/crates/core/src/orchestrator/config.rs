//! Experiment configuration (JSON).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::error::OrchestratorError;
use super::rank::RankKey;
use crate::generators::{FragmentConfig, GaConfig, NgramConfig};
use crate::scoring::{Range, RewardWeights, ScoreReport, TIndexConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Lbdd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelKind {
    Ngram(NgramConfig),
    Ga(GaConfig),
    Fragment(FragmentConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: String,
    #[serde(flatten)]
    pub kind: ModelKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    pub epochs: u32,
    pub candidates_per_model: usize,
    /// Safety net only; runs that hit it are flagged in the report.
    #[serde(default)]
    pub wall_clock_secs: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SomSpec {
    /// `.smi` file whose name column is the class label.
    pub labeled: PathBuf,
    pub target: String,
    #[serde(default = "default_som_side")]
    pub width: usize,
    #[serde(default = "default_som_side")]
    pub height: usize,
    #[serde(default = "default_som_epochs")]
    pub epochs: usize,
    /// Neurons classifying below this majority fraction get a ZOOM map.
    #[serde(default = "default_zoom_threshold")]
    pub zoom_threshold: f64,
}

fn default_som_side() -> usize {
    20
}

fn default_som_epochs() -> usize {
    10
}

fn default_zoom_threshold() -> f64 {
    0.8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Mode,
    /// Mandatory; there is no entropy-based default.
    pub seed: u64,
    /// Seed corpus for the generators and the similarity reference.
    pub reference_ligands: Vec<PathBuf>,
    /// Novelty reference; the reference ligands when absent.
    #[serde(default)]
    pub known_compound_refs: Option<PathBuf>,
    /// Actives for privileged-fragment mining (background = reference ligands).
    #[serde(default)]
    pub privileged_actives: Option<PathBuf>,
    #[serde(default)]
    pub som: Option<SomSpec>,
    #[serde(default)]
    pub property_ranges: BTreeMap<String, Range>,
    #[serde(default = "default_models")]
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub reward_weights: RewardWeights,
    #[serde(default)]
    pub t_index: TIndexConfig,
    pub budgets: Budgets,
    #[serde(default = "default_ranking")]
    pub ranking: Vec<RankKey>,
    pub output_dir: PathBuf,
}

/// Two language models, two GAs with different operator mixes, one fragment sampler.
pub fn default_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec { id: "lm4".into(), kind: ModelKind::Ngram(NgramConfig { order: 4, ..NgramConfig::default() }) },
        ModelSpec { id: "lm6".into(), kind: ModelKind::Ngram(NgramConfig::default()) },
        ModelSpec { id: "ga_a".into(), kind: ModelKind::Ga(GaConfig::default()) },
        ModelSpec {
            id: "ga_b".into(),
            kind: ModelKind::Ga(GaConfig { mutation_weights: [0.5, 0.5, 2.0, 1.0, 0.5, 2.0], ..GaConfig::default() }),
        },
        ModelSpec { id: "frag".into(), kind: ModelKind::Fragment(FragmentConfig::default()) },
    ]
}

fn default_ranking() -> Vec<RankKey> {
    vec![RankKey { key: "reward".into(), weight: 1.0 }]
}

impl ExperimentConfig {
    /// Parses JSON and resolves relative paths against `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<ExperimentConfig, OrchestratorError> {
        let mut cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| OrchestratorError::Config(e.to_string()))?;
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.reference_ligands.iter_mut().for_each(fix);
        cfg.known_compound_refs.iter_mut().for_each(fix);
        cfg.privileged_actives.iter_mut().for_each(fix);
        if let Some(s) = &mut cfg.som {
            fix(&mut s.labeled);
        }
        fix(&mut cfg.output_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(ExperimentConfig, String), OrchestratorError> {
        let text = std::fs::read_to_string(path).map_err(|e| OrchestratorError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Ok((ExperimentConfig::from_json(&text, base)?, text))
    }

    /// Reward weights with `property_ranges` merged over the weight file's ranges.
    pub fn effective_weights(&self) -> RewardWeights {
        let mut w = self.reward_weights.clone();
        w.ranges.extend(self.property_ranges.iter().map(|(k, v)| (k.clone(), *v)));
        w
    }

    pub fn validate(&self) -> Result<(), OrchestratorError> {
        let bad = |m: String| Err(OrchestratorError::Config(m));
        if self.models.is_empty() {
            return bad("at least one model must be enabled".into());
        }
        let mut ids: Vec<&str> = self.models.iter().map(|m| m.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("model ids must be unique".into());
        }
        if ids.iter().any(|id| id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')) {
            return bad("model ids must be non-empty and use only letters, digits, '_' or '-'".into());
        }
        if self.budgets.candidates_per_model == 0 {
            return bad("budgets.candidates_per_model must be positive".into());
        }
        if self.reference_ligands.is_empty() {
            return bad("reference_ligands must list at least one file".into());
        }
        if self.ranking.is_empty() {
            return bad("ranking needs at least one key".into());
        }
        let probe = ScoreReport::default();
        for k in &self.ranking {
            if probe.field(&k.key).is_err() {
                return bad(format!("unknown ranking key {:?}", k.key));
            }
            if !k.weight.is_finite() {
                return bad(format!("ranking weight for {:?} must be finite", k.key));
            }
        }
        self.effective_weights().validate().map_err(|e| OrchestratorError::Config(e.to_string()))?;
        Ok(())
    }
}
