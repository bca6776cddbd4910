//! Fragment sampler: weighted BRICS recombination over a corpus library.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::error::GeneratorError;
use super::{from_json, round_trip, to_json, Generator, Scored};
use crate::molgraph::brics::recombine_with;
use crate::molgraph::{brics_fragment, canonical_smiles, mol_from_smiles, BricsRules, Fragment, Molecule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FragmentConfig {
    pub max_heavy_atoms: usize,
    /// Share of a fragment's weight moved toward its relative mean reward per feedback.
    pub learning_rate: f64,
    pub max_retries: usize,
}

impl Default for FragmentConfig {
    fn default() -> Self {
        FragmentConfig { max_heavy_atoms: 50, learning_rate: 0.5, max_retries: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Entry {
    smiles: String,
    count: u32,
    weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct State {
    cfg: FragmentConfig,
    /// Sorted by SMILES.
    library: Vec<Entry>,
    /// Histogram of fragments per corpus molecule (index = count).
    sizes: Vec<u32>,
    epoch: u32,
}

#[derive(Debug, Clone)]
pub struct FragmentModel {
    state: State,
    fragments: Vec<Fragment>,
    lookup: HashMap<String, usize>,
    /// Fragments with an attachment compatible with the key label.
    partners: BTreeMap<u16, Vec<usize>>,
}

impl FragmentModel {
    fn from_state(state: State) -> Result<FragmentModel, GeneratorError> {
        let fragments: Vec<Fragment> = state
            .library
            .iter()
            .map(|e| Fragment::from_smiles(&e.smiles).map_err(|err| GeneratorError::Checkpoint(format!("fragment {}: {err}", e.smiles))))
            .collect::<Result<_, _>>()?;
        let lookup = state.library.iter().enumerate().map(|(i, e)| (e.smiles.clone(), i)).collect();
        let rules = BricsRules::shipped();
        let labels: Vec<u16> = rules.rules().iter().flat_map(|r| [r.label_a, r.label_b]).collect();
        let mut partners: BTreeMap<u16, Vec<usize>> = BTreeMap::new();
        for &l in &labels {
            let list: Vec<usize> =
                (0..fragments.len()).filter(|&i| fragments[i].attachments.iter().any(|a| rules.compatible(l, a.label))).collect();
            partners.insert(l, list);
        }
        Ok(FragmentModel { state, fragments, lookup, partners })
    }

    pub fn len(&self) -> usize {
        self.fragments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fragments.is_empty()
    }

    pub fn epoch(&self) -> u32 {
        self.state.epoch
    }

    /// Library fragments with their current sampling probability.
    pub fn probabilities(&self) -> Vec<(String, f64)> {
        let total: f64 = self.state.library.iter().map(|e| e.weight).sum();
        self.state.library.iter().map(|e| (e.smiles.clone(), e.weight / total)).collect()
    }

    fn pick(&self, among: &[usize], rng: &mut ChaCha8Rng) -> Option<usize> {
        let total: f64 = among.iter().map(|&i| self.state.library[i].weight).sum();
        if among.is_empty() || total <= 0.0 {
            return None;
        }
        let mut r = rng.gen::<f64>() * total;
        for &i in among {
            let w = self.state.library[i].weight;
            if r < w {
                return Some(i);
            }
            r -= w;
        }
        among.last().copied()
    }

    fn target_size(&self, rng: &mut ChaCha8Rng) -> usize {
        let total: u32 = self.state.sizes.iter().sum();
        let mut r = rng.gen_range(0..total.max(1));
        for (k, c) in self.state.sizes.iter().enumerate() {
            if r < *c {
                return k.max(1);
            }
            r -= c;
        }
        1
    }

    fn sample_one(&self, rng: &mut ChaCha8Rng) -> Molecule {
        let all: Vec<usize> = (0..self.fragments.len()).collect();
        let mut fallback = None;
        for _ in 0..self.state.cfg.max_retries.max(1) {
            let first = self.pick(&all, rng).expect("library is non-empty");
            let k = self.target_size(rng);
            let mut chosen = vec![first];
            let mut open: Vec<u16> = self.fragments[first].attachments.iter().map(|a| a.label).collect();
            while chosen.len() < k && !open.is_empty() {
                let slot = rng.gen_range(0..open.len());
                let label = open.swap_remove(slot);
                let Some(next) = self.partners.get(&label).and_then(|c| self.pick(c, rng)) else { continue };
                let f = &self.fragments[next];
                let used = f.attachments.iter().position(|a| BricsRules::shipped().compatible(label, a.label));
                open.extend(f.attachments.iter().enumerate().filter(|(i, _)| Some(*i) != used).map(|(_, a)| a.label));
                chosen.push(next);
            }
            let pieces: Vec<Fragment> = chosen.iter().map(|&i| self.fragments[i].clone()).collect();
            match recombine_with(&pieces, BricsRules::shipped(), rng, self.state.cfg.max_heavy_atoms) {
                Ok(m) if !m.is_empty() && round_trip(&m).is_some() => return m,
                _ => {
                    if fallback.is_none() {
                        fallback = recombine_with(&pieces[..1], BricsRules::shipped(), rng, usize::MAX).ok();
                    }
                }
            }
        }
        fallback.unwrap_or_default()
    }
}

/// Fragments every parseable corpus molecule into a frequency-weighted library.
pub fn frag_build(corpus: &[Molecule], cfg: FragmentConfig) -> Result<FragmentModel, GeneratorError> {
    let mut counts: BTreeMap<String, u32> = BTreeMap::new();
    let mut sizes: Vec<u32> = Vec::new();
    for mol in corpus.iter().filter(|m| m.is_sanitized() && !m.is_empty()) {
        let frags = brics_fragment(mol);
        if sizes.len() <= frags.len() {
            sizes.resize(frags.len() + 1, 0);
        }
        sizes[frags.len()] += 1;
        for f in &frags {
            *counts.entry(f.smiles()).or_insert(0) += 1;
        }
    }
    if counts.is_empty() {
        return Err(GeneratorError::EmptyLibrary);
    }
    let library = counts.into_iter().map(|(smiles, count)| Entry { smiles, count, weight: count as f64 }).collect();
    FragmentModel::from_state(State { cfg, library, sizes, epoch: 0 })
}

pub fn frag_sample(model: &FragmentModel, n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    (0..n).map(|_| canonical_smiles(&model.sample_one(rng))).collect()
}

impl Generator for FragmentModel {
    fn kind(&self) -> &'static str {
        "fragment"
    }

    fn propose(&mut self, n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
        frag_sample(self, n, rng)
    }

    /// Moves each fragment's weight toward its mean candidate reward relative
    /// to the batch mean.
    fn feedback(&mut self, scored: &[Scored]) {
        self.state.epoch += 1;
        if scored.is_empty() {
            return;
        }
        let batch_mean = scored.iter().map(|s| s.reward).sum::<f64>() / scored.len() as f64;
        if batch_mean <= 0.0 {
            return;
        }
        let mut sums: BTreeMap<usize, (f64, u32)> = BTreeMap::new();
        for s in scored {
            let Ok(mol) = mol_from_smiles(&s.smiles) else { continue };
            let mut present: Vec<usize> = brics_fragment(&mol).iter().filter_map(|f| self.lookup.get(&f.smiles()).copied()).collect();
            present.sort_unstable();
            present.dedup();
            for i in present {
                let e = sums.entry(i).or_insert((0.0, 0));
                e.0 += s.reward;
                e.1 += 1;
            }
        }
        let eta = self.state.cfg.learning_rate;
        for (i, (sum, n)) in sums {
            let rel = sum / n as f64 / batch_mean;
            let w = &mut self.state.library[i].weight;
            *w *= (1.0 - eta) + eta * rel;
        }
    }

    fn save(&self) -> String {
        to_json(&self.state)
    }

    fn restore(&mut self, payload: &str) -> Result<(), GeneratorError> {
        *self = FragmentModel::from_state(from_json(payload)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn mols(items: &[&str]) -> Vec<Molecule> {
        items.iter().map(|s| mol_from_smiles(s).unwrap()).collect()
    }

    #[test]
    fn uncleavable_corpus_reproduces_molecule() {
        let m = frag_build(&mols(&["c1ccccc1C"]), FragmentConfig::default()).unwrap();
        let out = frag_sample(&m, 5, &mut ChaCha8Rng::seed_from_u64(2));
        assert!(out.iter().all(|s| *s == canonical_smiles(&mol_from_smiles("Cc1ccccc1").unwrap())));
    }

    #[test]
    fn outputs_sanitize() {
        let m = frag_build(&mols(&["CCOC(=O)c1ccccc1", "CC(=O)Nc1ccc(O)cc1", "CCN(CC)c1ccccc1", "COc1ccccc1C(=O)NCC"]), FragmentConfig::default()).unwrap();
        for s in frag_sample(&m, 50, &mut ChaCha8Rng::seed_from_u64(5)) {
            assert!(mol_from_smiles(&s).is_ok(), "{s}");
        }
    }

    #[test]
    fn reweighting_favours_rewarded_fragments() {
        let mut m = frag_build(&mols(&["CCOC(=O)c1ccccc1", "CC(=O)NCc1ccccc1", "CCCOC(=O)C1CCCCC1", "CNC(=O)c1ccccc1"]), FragmentConfig::default()).unwrap();
        let has_n = |s: &str| s.contains('N') || s.contains('n');
        let p_n = |m: &FragmentModel| m.probabilities().iter().filter(|(s, _)| has_n(s)).map(|(_, p)| p).sum::<f64>();
        let before = p_n(&m);
        let batch = frag_sample(&m, 40, &mut ChaCha8Rng::seed_from_u64(7));
        let scored: Vec<Scored> = batch.iter().map(|s| Scored { smiles: s.clone(), reward: if has_n(s) { 1.0 } else { 0.0 } }).collect();
        m.feedback(&scored);
        assert!(p_n(&m) > before, "{} -> {}", before, p_n(&m));
    }
}
