//! Generative models behind a common propose/feedback contract.
//!
//! Three families ship: a SMILES n-gram language model refit by the
//! cross-entropy method, a graph genetic algorithm, and a BRICS fragment
//! sampler. Anything implementing [`Generator`] can join an experiment.

pub mod error;
pub mod fragment;
pub mod ga;
pub mod ngram;
pub mod tokens;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::molgraph::{canonical_smiles, mol_from_smiles, Molecule};
use crate::scoring::ScoreReport;

pub use error::GeneratorError;
pub use fragment::{frag_build, frag_sample, FragmentConfig, FragmentModel};
pub use ga::{ga_epoch, ga_init, GaConfig, GaModel, Mutation};
pub use ngram::{lm_feedback, lm_sample, lm_train, NgramConfig, NgramModel};
pub use tokens::tokenize;

/// A proposed structure after canonicalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub canonical_smiles: String,
    pub source_model: String,
    pub epoch: u32,
    pub score_report: Option<ScoreReport>,
}

/// Reward fed back to the model that proposed `smiles`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    /// The string as proposed (canonical when it parsed).
    pub smiles: String,
    pub reward: f64,
}

pub trait Generator: Send {
    /// Short family tag written into checkpoints.
    fn kind(&self) -> &'static str;

    /// Exactly `n` strings; validity is not guaranteed.
    fn propose(&mut self, n: usize, rng: &mut ChaCha8Rng) -> Vec<String>;

    /// Rewards for the previous proposal batch, in any order.
    fn feedback(&mut self, scored: &[Scored]);

    /// Text payload capturing the full model state.
    fn save(&self) -> String;

    /// Replaces the model state with a payload written by [`Generator::save`].
    fn restore(&mut self, payload: &str) -> Result<(), GeneratorError>;
}

/// Checkpoint helpers shared by the shipped models.
pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("generator state serializes")
}

pub(crate) fn from_json<T: for<'de> Deserialize<'de>>(payload: &str) -> Result<T, GeneratorError> {
    serde_json::from_str(payload).map_err(|e| GeneratorError::Checkpoint(e.to_string()))
}

/// Canonical SMILES of `mol` when it parses back to the same string.
pub(crate) fn round_trip(mol: &Molecule) -> Option<String> {
    let s = canonical_smiles(mol);
    let back = mol_from_smiles(&s).ok()?;
    (canonical_smiles(&back) == s).then_some(s)
}

/// Ranks scored items by reward (descending), ties by SMILES, and keeps the
/// top `fraction` that have a positive reward.
pub(crate) fn elite<'a>(scored: &'a [Scored], fraction: f64) -> Vec<&'a Scored> {
    let mut order: Vec<&Scored> = scored.iter().collect();
    order.sort_by(|a, b| b.reward.total_cmp(&a.reward).then_with(|| a.smiles.cmp(&b.smiles)));
    let k = ((scored.len() as f64 * fraction).ceil() as usize).min(scored.len());
    order.into_iter().take(k).filter(|s| s.reward > 0.0).collect()
}
