//! Fragment-frequency synthetic accessibility: 1 (easy) to 10 (hard).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::error::ScoringError;
use crate::molgraph::descriptors::{chiral_centers, spiro_atoms};
use crate::molgraph::{brics_fragment, Molecule};

/// How many corpus molecules contain each fragment.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FragmentStats {
    pub molecules: u64,
    pub counts: BTreeMap<String, u64>,
}

impl FragmentStats {
    pub fn from_molecules<'a>(mols: impl IntoIterator<Item = &'a Molecule>) -> FragmentStats {
        let mut stats = FragmentStats::default();
        for m in mols {
            stats.add(m);
        }
        stats
    }

    pub fn add(&mut self, mol: &Molecule) {
        self.molecules += 1;
        let distinct: BTreeSet<String> = brics_fragment(mol).iter().map(|f| f.smiles()).collect();
        for s in distinct {
            *self.counts.entry(s).or_insert(0) += 1;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.molecules == 0 || self.counts.is_empty()
    }

    /// Fraction of corpus molecules containing `fragment`.
    pub fn frequency(&self, fragment: &str) -> f64 {
        if self.molecules == 0 {
            return 0.0;
        }
        self.counts.get(fragment).copied().unwrap_or(0) as f64 / self.molecules as f64
    }

    /// Two-column text: `fragment <TAB> count`, preceded by a `# molecules N` line.
    pub fn to_text(&self) -> String {
        let mut out = format!("# molecules {}\n", self.molecules);
        for (k, v) in &self.counts {
            out.push_str(&format!("{k}\t{v}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<FragmentStats, ScoringError> {
        let mut stats = FragmentStats::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("# molecules") {
                stats.molecules = rest.trim().parse().map_err(|_| ScoringError::Parse(format!("line {}: bad molecule count", i + 1)))?;
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (frag, count) = line
                .split_once('\t')
                .ok_or_else(|| ScoringError::Parse(format!("line {}: expected two columns", i + 1)))?;
            let count: u64 = count.trim().parse().map_err(|_| ScoringError::Parse(format!("line {}: bad count", i + 1)))?;
            stats.counts.insert(frag.to_string(), count);
        }
        if stats.molecules == 0 {
            stats.molecules = stats.counts.values().copied().max().unwrap_or(0);
        }
        Ok(stats)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RersaConfig {
    /// Smallest frequency credited to a fragment (unseen fragments get this).
    pub floor: f64,
    /// Points added when every fragment sits at the floor.
    pub rarity_weight: f64,
    pub macrocycle_penalty: f64,
    pub macrocycle_min_size: usize,
    /// Added per spiro atom.
    pub spiro_penalty: f64,
    pub stereo_penalty: f64,
    pub stereo_threshold: usize,
    pub size_penalty: f64,
    pub size_threshold: usize,
}

impl Default for RersaConfig {
    fn default() -> Self {
        RersaConfig {
            floor: 1e-4,
            rarity_weight: 6.0,
            macrocycle_penalty: 1.0,
            macrocycle_min_size: 9,
            spiro_penalty: 0.5,
            stereo_penalty: 1.0,
            stereo_threshold: 4,
            size_penalty: 1.0,
            size_threshold: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RersaParts {
    pub rarity: f64,
    pub complexity: f64,
    pub score: f64,
}

pub fn rersa_parts(mol: &Molecule, stats: &FragmentStats, cfg: &RersaConfig) -> Result<RersaParts, ScoringError> {
    if stats.is_empty() {
        return Err(ScoringError::EmptyCorpusStats);
    }
    let floor = cfg.floor.clamp(1e-12, 1.0);
    let max_surprise = -floor.log10();
    let frags = brics_fragment(mol);
    let rarity = if frags.is_empty() || max_surprise <= 0.0 {
        0.0
    } else {
        let mean = frags.iter().map(|f| -stats.frequency(&f.smiles()).max(floor).log10()).sum::<f64>() / frags.len() as f64;
        cfg.rarity_weight * mean / max_surprise
    };
    let mut complexity = 0.0;
    if mol.rings().iter().any(|r| r.len() >= cfg.macrocycle_min_size) {
        complexity += cfg.macrocycle_penalty;
    }
    complexity += cfg.spiro_penalty * spiro_atoms(mol).len() as f64;
    if chiral_centers(mol).len() >= cfg.stereo_threshold {
        complexity += cfg.stereo_penalty;
    }
    if mol.heavy_atom_count() > cfg.size_threshold {
        complexity += cfg.size_penalty;
    }
    Ok(RersaParts { rarity, complexity, score: (1.0 + rarity + complexity).clamp(1.0, 10.0) })
}

pub fn rersa(mol: &Molecule, stats: &FragmentStats, cfg: &RersaConfig) -> Result<f64, ScoringError> {
    rersa_parts(mol, stats, cfg).map(|p| p.score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::mol_from_smiles;

    fn mols(s: &[&str]) -> Vec<Molecule> {
        s.iter().map(|x| mol_from_smiles(x).unwrap()).collect()
    }

    #[test]
    fn common_fragments_score_low() {
        let corpus = mols(&["CCOC(=O)c1ccccc1", "CCOC(=O)c1ccccc1", "CCOC(=O)c1ccccc1"]);
        let stats = FragmentStats::from_molecules(&corpus);
        let s = rersa(&corpus[0], &stats, &RersaConfig::default()).unwrap();
        assert!(s <= 2.0, "{s}");
    }

    #[test]
    fn unseen_fragments_hit_max_rarity() {
        let stats = FragmentStats::from_molecules(&mols(&["CCOC(=O)c1ccccc1"]));
        let p = rersa_parts(&mol_from_smiles("NCCCCCCN").unwrap(), &stats, &RersaConfig::default()).unwrap();
        assert!((p.rarity - 6.0).abs() < 1e-12);
    }

    #[test]
    fn empty_stats_rejected() {
        let m = mol_from_smiles("C").unwrap();
        assert_eq!(rersa(&m, &FragmentStats::default(), &RersaConfig::default()), Err(ScoringError::EmptyCorpusStats));
    }

    #[test]
    fn text_round_trip() {
        let stats = FragmentStats::from_molecules(&mols(&["CCOC(=O)c1ccccc1", "CCN"]));
        assert_eq!(FragmentStats::from_text(&stats.to_text()).unwrap(), stats);
    }
}
