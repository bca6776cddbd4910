//! T-index: balance between carbons and heteroatoms.

use serde::{Deserialize, Serialize};

use crate::molgraph::DescriptorVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TIndexConfig {
    pub lo: f64,
    pub hi: f64,
    /// Molecules below this size always pass.
    pub min_heavy_atoms: usize,
}

impl Default for TIndexConfig {
    fn default() -> Self {
        TIndexConfig { lo: 0.05, hi: 0.60, min_heavy_atoms: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TIndexResult {
    pub pass: bool,
    pub ratio: f64,
}

pub fn t_index(desc: &DescriptorVector, cfg: &TIndexConfig) -> TIndexResult {
    t_index_counts(desc.heavy_atoms, desc.heteroatoms, cfg)
}

/// Same verdict from raw counts, for use before descriptors exist.
pub fn t_index_counts(heavy_atoms: usize, heteroatoms: usize, cfg: &TIndexConfig) -> TIndexResult {
    let ratio = if heavy_atoms == 0 { 0.0 } else { heteroatoms as f64 / heavy_atoms as f64 };
    let pass = heavy_atoms < cfg.min_heavy_atoms || (cfg.lo..=cfg.hi).contains(&ratio);
    TIndexResult { pass, ratio }
}
