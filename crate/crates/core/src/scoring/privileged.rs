//! Privileged fragments: motifs enriched in actives over a background set.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::molgraph::smarts::Target;
use crate::molgraph::{brics_fragment, ChemError, Fragment, Molecule, Pattern};

pub const DEFAULT_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivilegedFragment {
    pub smiles: String,
    pub enrichment: f64,
    pub active_count: usize,
}

/// Privileged fragments with their compiled substructure queries.
#[derive(Debug, Clone, Default)]
pub struct PfSet {
    items: Vec<(PrivilegedFragment, Pattern)>,
}

impl PfSet {
    pub fn new(fragments: Vec<PrivilegedFragment>) -> Result<PfSet, ChemError> {
        let items = fragments
            .into_iter()
            .map(|f| Fragment::from_smiles(&f.smiles).map(|fr| (f, fr.pattern())))
            .collect::<Result<_, _>>()?;
        Ok(PfSet { items })
    }

    pub fn fragments(&self) -> impl Iterator<Item = &PrivilegedFragment> {
        self.items.iter().map(|(f, _)| f)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

fn fragment_sets(mols: &[Molecule]) -> Vec<BTreeSet<String>> {
    mols.iter().map(|m| brics_fragment(m).iter().map(Fragment::smiles).collect()).collect()
}

/// Fragments of `actives` whose frequency ratio over the background reaches
/// `min_enrichment`, seen in at least two actives. Sorted by descending
/// enrichment, then SMILES.
pub fn pf_mine(actives: &[Molecule], background: &[Molecule], min_enrichment: f64, floor: f64) -> Vec<PrivilegedFragment> {
    if actives.is_empty() || background.is_empty() {
        return Vec::new();
    }
    let count = |sets: &[BTreeSet<String>]| {
        let mut c: BTreeMap<String, usize> = BTreeMap::new();
        for s in sets {
            for f in s {
                *c.entry(f.clone()).or_insert(0) += 1;
            }
        }
        c
    };
    let act = count(&fragment_sets(actives));
    let bg = count(&fragment_sets(background));
    let mut out = Vec::new();
    for (smiles, n) in act {
        if n < 2 {
            continue;
        }
        let fa = n as f64 / actives.len() as f64;
        let fb = bg.get(&smiles).copied().unwrap_or(0) as f64 / background.len() as f64;
        let enrichment = fa / fb.max(floor);
        if enrichment >= min_enrichment {
            out.push(PrivilegedFragment { smiles, enrichment, active_count: n });
        }
    }
    out.sort_by(|a, b| b.enrichment.total_cmp(&a.enrichment).then_with(|| a.smiles.cmp(&b.smiles)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfScore {
    pub score: f64,
    /// Set when no fragments were supplied and the neutral score was returned.
    pub empty_set: bool,
}

/// Enrichment-weighted fraction of fragments present in `mol`.
pub fn pf_score(mol: &Molecule, pfs: &PfSet) -> PfScore {
    let total: f64 = pfs.fragments().map(|p| p.enrichment.max(0.0)).sum();
    if pfs.is_empty() || total <= 0.0 {
        return PfScore { score: 0.5, empty_set: true };
    }
    let target = Target::new(mol);
    let hit: f64 = pfs
        .items
        .iter()
        .filter(|(_, p)| p.atom_count() > 0 && !p.find_in(&target, None, 1).is_empty())
        .map(|(f, _)| f.enrichment.max(0.0))
        .fold(0.0, |a, b| a + b);
    PfScore { score: (hit / total).clamp(0.0, 1.0), empty_set: false }
}
