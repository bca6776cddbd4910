//! Set-level generation metrics on SMILES batches.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::error::BenchmarkError;
use super::exact::{exact_sum, ExactSum};
use crate::molgraph::{brics_fragment, canonical_smiles, fingerprint, mol_from_smiles, murcko_scaffold, tanimoto, Fingerprint, Molecule};

/// Parsed batch: its size and the valid entries in input order.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub total: usize,
    pub valid: Vec<(String, Molecule)>,
}

pub fn parse_batch<S: AsRef<str> + Sync>(batch: &[S]) -> Parsed {
    let valid = batch
        .par_iter()
        .map(|s| mol_from_smiles(s.as_ref()).ok().filter(|m| !m.is_empty()).map(|m| (canonical_smiles(&m), m)))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Parsed { total: batch.len(), valid }
}

impl Parsed {
    pub fn validity(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.valid.len() as f64 / self.total as f64
        }
    }

    pub fn canonical_set(&self) -> BTreeSet<&str> {
        self.valid.iter().map(|(s, _)| s.as_str()).collect()
    }

    pub fn fingerprints(&self) -> Vec<Fingerprint> {
        self.valid.par_iter().map(|(_, m)| fingerprint(m)).collect()
    }

    /// BRICS fragment occurrence counts over valid entries.
    pub fn fragment_counts(&self) -> BTreeMap<String, u64> {
        count_all(self.valid.par_iter().map(|(_, m)| brics_fragment(m).iter().map(|f| f.smiles()).collect()).collect())
    }

    /// Murcko scaffold counts over valid entries; acyclic molecules count under "".
    pub fn scaffold_counts(&self) -> BTreeMap<String, u64> {
        count_all(self.valid.par_iter().map(|(_, m)| vec![canonical_smiles(&murcko_scaffold(m))]).collect())
    }
}

fn count_all(keys: Vec<Vec<String>>) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for k in keys.into_iter().flatten() {
        *out.entry(k).or_insert(0) += 1;
    }
    out
}

/// Fraction of entries that parse and sanitize to a non-empty molecule.
pub fn validity<S: AsRef<str> + Sync>(batch: &[S]) -> f64 {
    parse_batch(batch).validity()
}

/// Distinct canonical SMILES among the first `k` valid entries, over `k`.
pub fn uniqueness_at<S: AsRef<str> + Sync>(batch: &[S], k: usize) -> Result<f64, BenchmarkError> {
    uniqueness_parsed(&parse_batch(batch), k)
}

pub fn uniqueness_parsed(parsed: &Parsed, k: usize) -> Result<f64, BenchmarkError> {
    if k == 0 || k > parsed.total {
        return Err(BenchmarkError::InvalidK { k, len: parsed.total });
    }
    let distinct: BTreeSet<&str> = parsed.valid.iter().take(k).map(|(s, _)| s.as_str()).collect();
    Ok(distinct.len() as f64 / k as f64)
}

/// Fraction of distinct valid structures whose canonical form is absent from `training`.
pub fn novelty_fraction<S: AsRef<str> + Sync, T: AsRef<str> + Sync>(batch: &[S], training: &[T]) -> f64 {
    let train = parse_batch(training);
    novelty_parsed(&parse_batch(batch), &train.canonical_set())
}

pub fn novelty_parsed(parsed: &Parsed, training: &BTreeSet<&str>) -> f64 {
    let unique = parsed.canonical_set();
    if unique.is_empty() {
        return 0.0;
    }
    unique.iter().filter(|s| !training.contains(*s)).count() as f64 / unique.len() as f64
}

fn sim_pow(a: &Fingerprint, b: &Fingerprint, p: u32) -> f64 {
    let t = tanimoto(a, b).unwrap_or(0.0);
    if p == 1 {
        t
    } else {
        t.powi(p as i32)
    }
}

/// `1 - mean(tanimoto^p)` over ordered pairs of distinct positions, by rows in parallel.
pub fn internal_diversity_fps(fps: &[Fingerprint], p: u32) -> f64 {
    let n = fps.len();
    if n < 2 {
        return 0.0;
    }
    let rows: Vec<ExactSum> = (1..n).into_par_iter().map(|i| fps[..i].iter().map(|f| 2.0 * sim_pow(&fps[i], f, p)).collect()).collect();
    let mut total = ExactSum::new();
    rows.iter().for_each(|r| total.merge(r));
    (1.0 - total.value() / (n * (n - 1)) as f64).clamp(0.0, 1.0)
}

/// Serial O(n²) reference for [`internal_diversity_fps`].
pub fn internal_diversity_brute(fps: &[Fingerprint], p: u32) -> f64 {
    let n = fps.len();
    if n < 2 {
        return 0.0;
    }
    let mut total = ExactSum::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total.add(sim_pow(&fps[i], &fps[j], p));
            }
        }
    }
    (1.0 - total.value() / (n * (n - 1)) as f64).clamp(0.0, 1.0)
}

pub fn internal_diversity<S: AsRef<str> + Sync>(batch: &[S], p: u32) -> f64 {
    internal_diversity_fps(&parse_batch(batch).fingerprints(), p)
}

/// Mean over `batch` of the highest Tanimoto similarity to any reference.
pub fn snn_fps(batch: &[Fingerprint], reference: &[Fingerprint]) -> f64 {
    if batch.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let best: Vec<f64> = batch.par_iter().map(|a| reference.iter().map(|b| sim_pow(a, b, 1)).fold(0.0, f64::max)).collect();
    (exact_sum(best) / batch.len() as f64).clamp(0.0, 1.0)
}

pub fn snn<S: AsRef<str> + Sync, T: AsRef<str> + Sync>(batch: &[S], reference: &[T]) -> f64 {
    snn_fps(&parse_batch(batch).fingerprints(), &parse_batch(reference).fingerprints())
}

/// Cosine similarity of two count vectors; 0 when either is empty.
pub fn cosine_counts(a: &BTreeMap<String, u64>, b: &BTreeMap<String, u64>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    if a == b {
        return 1.0;
    }
    let dot: u128 = a.iter().filter_map(|(k, x)| b.get(k).map(|y| *x as u128 * *y as u128)).sum();
    let norm = |v: &BTreeMap<String, u64>| v.values().map(|x| *x as u128 * *x as u128).sum::<u128>();
    (dot as f64 / ((norm(a) as f64) * (norm(b) as f64)).sqrt()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FragScaf {
    pub frag_cosine: f64,
    pub scaf_cosine: f64,
}

pub fn frag_scaf_similarity<S: AsRef<str> + Sync, T: AsRef<str> + Sync>(batch: &[S], reference: &[T]) -> FragScaf {
    let (a, b) = (parse_batch(batch), parse_batch(reference));
    FragScaf {
        frag_cosine: cosine_counts(&a.fragment_counts(), &b.fragment_counts()),
        scaf_cosine: cosine_counts(&a.scaffold_counts(), &b.scaffold_counts()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SET: [&str; 5] = ["CCO", "c1ccccc1O", "CC(=O)Nc1ccc(O)cc1", "C1CCNCC1", "OC(=O)c1ccccc1"];

    #[test]
    fn validity_cases() {
        assert_eq!(validity(&SET), 1.0);
        assert_eq!(validity(&["xx", "C1CC", "(("]), 0.0);
        assert_eq!(validity(&["CC", "xx", "O", "N"]), 0.75);
        assert_eq!(validity::<&str>(&[]), 0.0);
    }

    #[test]
    fn uniqueness_cases() {
        assert_eq!(uniqueness_at(&["CCO"; 4], 4).unwrap(), 0.25);
        assert_eq!(uniqueness_at(&["CCO", "OCC", "C", "N"], 2).unwrap(), 0.5);
        assert_eq!(uniqueness_at(&SET, 5).unwrap(), 1.0);
        assert!(uniqueness_at(&SET, 6).is_err());
        assert!(uniqueness_at(&SET, 0).is_err());
    }

    #[test]
    fn novelty_cases() {
        assert_eq!(novelty_fraction(&SET[..3], &SET), 0.0);
        assert_eq!(novelty_fraction(&["CCCC", "CCN"], &SET), 1.0);
        assert_eq!(novelty_fraction(&["OCC", "CCCC", "c1ccccc1O", "CCN"], &SET), 0.5);
    }

    #[test]
    fn diversity_cases() {
        assert_eq!(internal_diversity(&["CCO"; 6], 1), 0.0);
        assert_eq!(internal_diversity(&["CCO"; 6], 2), 0.0);
        let disjoint = vec![Fingerprint::from_bits(64, [1, 2]).unwrap(), Fingerprint::from_bits(64, [3]).unwrap(), Fingerprint::from_bits(64, [9, 10]).unwrap()];
        assert_eq!(internal_diversity_fps(&disjoint, 1), 1.0);
        assert_eq!(internal_diversity_fps(&disjoint[..1], 1), 0.0);
    }

    #[test]
    fn snn_cases() {
        assert_eq!(snn(&SET, &SET), 1.0);
        let a = Fingerprint::from_bits(64, [1, 2, 3]).unwrap();
        let b = Fingerprint::from_bits(64, [2, 3, 4, 5]).unwrap();
        let c = Fingerprint::from_bits(64, [7]).unwrap();
        assert_eq!(snn_fps(&[a.clone()], &[c.clone()]), 0.0);
        assert_eq!(snn_fps(&[a.clone()], &[b.clone()]), tanimoto(&a, &b).unwrap());
    }

    #[test]
    fn frag_scaf_cases() {
        let same = frag_scaf_similarity(&SET, &SET);
        assert_eq!((same.frag_cosine, same.scaf_cosine), (1.0, 1.0));
        let none = frag_scaf_similarity(&["c1ccccc1"], &["C1CCCCC1"]);
        assert_eq!((none.frag_cosine, none.scaf_cosine), (0.0, 0.0));
    }

    #[test]
    fn hand_counted_scaffolds() {
        // scaffolds: benzene, benzene, "" vs benzene, cyclohexane
        let gen = ["Cc1ccccc1", "Oc1ccccc1", "CCO"];
        let reference = ["c1ccccc1CC", "OC1CCCCC1"];
        let s = frag_scaf_similarity(&gen, &reference);
        // a = (benzene 2, "" 1), b = (benzene 1, cyclohexane 1): 2 / sqrt(5 * 2)
        assert_eq!(s.scaf_cosine, 2.0 / 10f64.sqrt());
    }
}
