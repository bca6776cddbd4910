//! Per-model benchmark rows, emitted as CSV and JSON.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::frechet::{descriptor_rows, frechet_distance, gaussian_fit};
use super::metrics::{cosine_counts, internal_diversity_fps, novelty_parsed, parse_batch, snn_fps, uniqueness_parsed, Parsed};
use crate::molgraph::Fingerprint;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_K: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub model: String,
    pub n_generated: usize,
    pub n_valid: usize,
    pub n_reference: usize,
    pub n_training: usize,
    pub k: usize,
    pub validity: f64,
    pub uniqueness_at_k: f64,
    pub novelty_fraction: f64,
    pub intdiv1: f64,
    pub intdiv2: f64,
    pub snn: f64,
    pub frag_cosine: f64,
    pub scaf_cosine: f64,
    /// Not a MOSES metric; see [`super::frechet`].
    pub frechet_descriptor_distance: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub schema_version: u32,
    pub rows: Vec<BenchmarkReport>,
}

/// Reference and training sets, parsed once and shared by every row.
pub struct BenchmarkContext {
    reference: Parsed,
    ref_fps: Vec<Fingerprint>,
    ref_frags: BTreeMap<String, u64>,
    ref_scafs: BTreeMap<String, u64>,
    ref_rows: Vec<Vec<f64>>,
    training: Parsed,
}

impl BenchmarkContext {
    pub fn new<R: AsRef<str> + Sync, T: AsRef<str> + Sync>(reference: &[R], training: &[T]) -> BenchmarkContext {
        let reference = parse_batch(reference);
        let mols: Vec<_> = reference.valid.iter().map(|(_, m)| m).collect();
        BenchmarkContext {
            ref_fps: reference.fingerprints(),
            ref_frags: reference.fragment_counts(),
            ref_scafs: reference.scaffold_counts(),
            ref_rows: descriptor_rows(&mols),
            reference,
            training: parse_batch(training),
        }
    }

    /// One row; `k` defaults to `min(1000, batch size)` and is capped at the batch size.
    pub fn evaluate<S: AsRef<str> + Sync>(&self, model: &str, batch: &[S], k: Option<usize>) -> BenchmarkReport {
        let parsed = parse_batch(batch);
        let k = k.unwrap_or(DEFAULT_K).min(parsed.total);
        let mut row = BenchmarkReport {
            model: model.to_string(),
            n_generated: parsed.total,
            n_valid: parsed.valid.len(),
            n_reference: self.reference.valid.len(),
            n_training: self.training.valid.len(),
            k,
            validity: parsed.validity(),
            uniqueness_at_k: 0.0,
            novelty_fraction: 0.0,
            intdiv1: 0.0,
            intdiv2: 0.0,
            snn: 0.0,
            frag_cosine: 0.0,
            scaf_cosine: 0.0,
            frechet_descriptor_distance: None,
            warnings: Vec::new(),
        };
        if parsed.valid.is_empty() {
            let msg = if parsed.total == 0 { "empty batch" } else { "no valid molecules" };
            log::warn!("{model}: {msg}");
            row.warnings.push(msg.to_string());
            return row;
        }
        if self.reference.valid.is_empty() {
            row.warnings.push("empty reference set".into());
        }
        if self.training.valid.is_empty() {
            row.warnings.push("empty training set".into());
        }
        let fps = parsed.fingerprints();
        let training: BTreeSet<&str> = self.training.canonical_set();
        row.uniqueness_at_k = uniqueness_parsed(&parsed, k).unwrap_or(0.0);
        row.novelty_fraction = novelty_parsed(&parsed, &training);
        row.intdiv1 = internal_diversity_fps(&fps, 1);
        row.intdiv2 = internal_diversity_fps(&fps, 2);
        row.snn = snn_fps(&fps, &self.ref_fps);
        row.frag_cosine = cosine_counts(&parsed.fragment_counts(), &self.ref_frags);
        row.scaf_cosine = cosine_counts(&parsed.scaffold_counts(), &self.ref_scafs);
        let mols: Vec<_> = parsed.valid.iter().map(|(_, m)| m).collect();
        row.frechet_descriptor_distance = match (gaussian_fit(&descriptor_rows(&mols)), gaussian_fit(&self.ref_rows)) {
            (Some(a), Some(b)) => Some(frechet_distance(&a, &b)),
            _ => None,
        };
        row
    }
}

/// One row per `(model, batch)` pair, in input order.
pub fn benchmark_report<S, R, T>(batches: &[(String, Vec<S>)], reference: &[R], training: &[T], k: Option<usize>) -> BenchmarkTable
where
    S: AsRef<str> + Sync,
    R: AsRef<str> + Sync,
    T: AsRef<str> + Sync,
{
    let ctx = BenchmarkContext::new(reference, training);
    BenchmarkTable { schema_version: SCHEMA_VERSION, rows: batches.iter().map(|(m, b)| ctx.evaluate(m, b, k)).collect() }
}

impl BenchmarkTable {
    pub const COLUMNS: [&'static str; 15] = [
        "model",
        "n_generated",
        "n_valid",
        "n_reference",
        "n_training",
        "k",
        "validity",
        "uniqueness_at_k",
        "novelty_fraction",
        "intdiv1",
        "intdiv2",
        "snn",
        "frag_cosine",
        "scaf_cosine",
        "frechet_descriptor_distance",
    ];

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::COLUMNS).expect("in-memory csv");
        let f = |x: f64| format!("{x:?}");
        for r in &self.rows {
            let row = vec![
                r.model.clone(),
                r.n_generated.to_string(),
                r.n_valid.to_string(),
                r.n_reference.to_string(),
                r.n_training.to_string(),
                r.k.to_string(),
                f(r.validity),
                f(r.uniqueness_at_k),
                f(r.novelty_fraction),
                f(r.intdiv1),
                f(r.intdiv2),
                f(r.snn),
                f(r.frag_cosine),
                f(r.scaf_cosine),
                r.frechet_descriptor_distance.map(f).unwrap_or_default(),
            ];
            w.write_record(&row).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::metrics::{frag_scaf_similarity, internal_diversity, novelty_fraction, snn, uniqueness_at, validity};

    const SET: [&str; 6] = ["CCO", "c1ccccc1O", "CC(=O)Nc1ccc(O)cc1", "C1CCNCC1", "OC(=O)c1ccccc1", "Cc1ccccc1"];

    #[test]
    fn self_comparison_fixed_point() {
        let t = benchmark_report(&[("self".to_string(), SET.to_vec())], &SET, &SET, None);
        let r = &t.rows[0];
        assert_eq!((r.validity, r.novelty_fraction, r.snn, r.frag_cosine, r.scaf_cosine), (1.0, 0.0, 1.0, 1.0, 1.0));
        assert_eq!(r.k, SET.len());
        assert!(r.frechet_descriptor_distance.unwrap() < 1e-6);
    }

    #[test]
    fn empty_batch_row() {
        let t = benchmark_report(&[("none".to_string(), Vec::<&str>::new())], &SET, &SET, Some(10));
        let r = &t.rows[0];
        assert_eq!((r.validity, r.snn, r.k), (0.0, 0.0, 0));
        assert_eq!(r.warnings, vec!["empty batch"]);
    }

    #[test]
    fn row_matches_individual_metrics() {
        let gen = ["CCO", "CCO", "CCCN", "c1ccncc1", "xx", "CC(C)Cc1ccccc1"];
        let reference = &SET[..4];
        let train = &SET[2..];
        let r = benchmark_report(&[("g".to_string(), gen.to_vec())], reference, train, Some(4)).rows.remove(0);
        assert_eq!(r.validity, validity(&gen));
        assert_eq!(r.uniqueness_at_k, uniqueness_at(&gen, 4).unwrap());
        assert_eq!(r.novelty_fraction, novelty_fraction(&gen, train));
        assert_eq!(r.intdiv1, internal_diversity(&gen, 1));
        assert_eq!(r.intdiv2, internal_diversity(&gen, 2));
        assert_eq!(r.snn, snn(&gen, reference));
        let fs = frag_scaf_similarity(&gen, reference);
        assert_eq!((r.frag_cosine, r.scaf_cosine), (fs.frag_cosine, fs.scaf_cosine));
    }

    #[test]
    fn csv_and_json_shapes() {
        let t = benchmark_report(&[("a".to_string(), SET.to_vec()), ("b".to_string(), vec!["CCN"])], &SET, &SET, None);
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("model,n_generated"));
        let back: BenchmarkTable = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(back, t);
    }
}
