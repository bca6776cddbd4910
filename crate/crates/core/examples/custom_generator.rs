//! Plugging a hand-written generator into the experiment loop alongside a
//! built-in one.
//!
//!     cargo run --release --example custom_generator

use molforge::generators::{Generator, GeneratorError, Scored};
use molforge::orchestrator::{build_context, build_models, read_molecules, Experiment, ExperimentConfig, RunOptions};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

/// Proposes from a fixed list and keeps whatever scored best so far at the front.
struct Library {
    items: Vec<String>,
}

impl Generator for Library {
    fn kind(&self) -> &'static str {
        "library"
    }

    fn propose(&mut self, n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
        (0..n).map(|_| self.items.choose(rng).expect("non-empty library").clone()).collect()
    }

    fn feedback(&mut self, scored: &[Scored]) {
        if let Some(best) = scored.iter().max_by(|a, b| a.reward.total_cmp(&b.reward)) {
            self.items.retain(|s| s != &best.smiles);
            self.items.insert(0, best.smiles.clone());
        }
    }

    fn save(&self) -> String {
        self.items.join("\n")
    }

    fn restore(&mut self, payload: &str) -> Result<(), GeneratorError> {
        self.items = payload.lines().map(str::to_string).collect();
        Ok(())
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("molforge-custom");
    let text = serde_json::json!({
        "seed": 3,
        "reference_ligands": ["data/nci_1k.smi"],
        "budgets": {"epochs": 3, "candidates_per_model": 40},
        "output_dir": out,
    })
    .to_string();
    let cfg = ExperimentConfig::from_json(&text, std::path::Path::new(env!("CARGO_MANIFEST_DIR")))?;
    let ligands = read_molecules(&cfg.reference_ligands[0])?;
    let ctx = build_context(&cfg, &ligands)?;

    let library = ["CC(=O)Nc1ccc(O)cc1", "c1ccc2c(c1)CCN2", "O=C(O)C1CCCN1", "CN1CCN(c2ccccc2)CC1"];
    let mut models: Vec<(String, Box<dyn Generator>)> =
        vec![("lib".into(), Box::new(Library { items: library.iter().map(|s| s.to_string()).collect() }))];
    models.extend(build_models(&cfg, &ligands)?.into_iter().filter(|(id, _)| id == "ga_a"));

    let result = Experiment::with_generators(cfg, text, ctx, models)?.run(&RunOptions::default())?;
    for m in &result.models {
        println!("{} ({}): max reward by epoch {:.3?}", m.id, m.kind, m.epochs.iter().map(|e| e.max_reward).collect::<Vec<_>>());
    }
    let from_lib: Vec<_> = result.ranked.iter().filter(|c| c.source_model == "lib").collect();
    println!("{} of {} ranked structures came from the library", from_lib.len(), result.ranked.len());
    Ok(())
}
