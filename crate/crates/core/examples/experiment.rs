//! A small end-to-end run of the default five-model ensemble.
//!
//!     cargo run --release --example experiment -- /tmp/molforge-demo

use std::path::PathBuf;

use molforge::orchestrator::{Experiment, ExperimentConfig, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("molforge-experiment"));
    let text = serde_json::json!({
        "seed": 42,
        "reference_ligands": ["data/nci_1k.smi"],
        "budgets": {"epochs": 4, "candidates_per_model": 60},
        "output_dir": out,
    })
    .to_string();
    let cfg = ExperimentConfig::from_json(&text, std::path::Path::new(env!("CARGO_MANIFEST_DIR")))?;
    let result = Experiment::new(cfg, text)?.run(&RunOptions::default())?;

    println!("{} epochs, stop reason {:?}", result.epochs_completed, result.stop_reason);
    println!("top-k mean reward by epoch: {:.3?}", result.top_k_by_epoch);
    for m in &result.models {
        let last = m.epochs.last().expect("at least one epoch");
        println!("  {:<6} {:<9} validity {:.2} uniqueness {:.2} max reward {:.3}", m.id, m.kind, last.validity, last.uniqueness, last.max_reward);
    }
    for c in result.ranked.iter().take(5) {
        println!("#{} {:.3} {} ({}, epoch {})", c.rank, c.rank_score, c.report.canonical_smiles, c.source_model, c.epoch);
    }
    println!("outputs in {}", out.display());
    Ok(())
}
