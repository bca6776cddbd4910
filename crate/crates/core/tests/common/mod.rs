#![allow(dead_code)]

use std::path::{Path, PathBuf};

use molforge::data;
use molforge::molgraph::{mol_from_smiles, Molecule};
use molforge::orchestrator::ExperimentConfig;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn manifest_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

pub fn test_data(name: &str) -> PathBuf {
    manifest_dir().join("tests").join("data").join(name)
}

/// SMILES column of the shipped 1000-compound corpus.
pub fn corpus_smiles() -> Vec<String> {
    data::lines(data::embedded(data::CORPUS).expect("corpus is embedded"))
        .map(|(_, l)| l.split(['\t', ' ']).next().unwrap_or("").to_string())
        .collect()
}

pub fn corpus() -> Vec<(String, Molecule)> {
    corpus_smiles()
        .into_iter()
        .map(|s| {
            let m = mol_from_smiles(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
            (s, m)
        })
        .collect()
}

pub fn shuffled_perm<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Default-ensemble config over the shipped corpus writing to `out`.
pub fn desk_config(out: &Path, seed: u64, epochs: u32, candidates: usize) -> (ExperimentConfig, String) {
    let text = serde_json::json!({
        "seed": seed,
        "reference_ligands": ["data/nci_1k.smi"],
        "budgets": {"epochs": epochs, "candidates_per_model": candidates},
        "output_dir": out,
    })
    .to_string();
    let cfg = ExperimentConfig::from_json(&text, manifest_dir()).expect("desk config is valid");
    (cfg, text)
}

/// Tab-separated rows of a test data file, skipping `#` comments and blanks.
pub fn tsv_rows(name: &str) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(test_data(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    data::lines(&text).map(|(_, l)| l.split('\t').map(str::to_string).collect()).collect()
}
