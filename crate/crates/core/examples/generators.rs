//! The three generator families trained on the bundled corpus, with one
//! round of reward feedback each.
//!
//!     cargo run --release --example generators

use molforge::data;
use molforge::generators::{frag_build, ga_init, lm_train, FragmentConfig, GaConfig, Generator, NgramConfig, Scored};
use molforge::molgraph::mol_from_smiles;
use molforge::scoring::{RewardWeights, ScoringContext};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let corpus: Vec<String> = data::lines(data::embedded(data::CORPUS).unwrap()).map(|(_, l)| l.split_whitespace().next().unwrap().to_string()).collect();
    let mols: Vec<_> = corpus.iter().filter_map(|s| mol_from_smiles(s).ok()).collect();
    let ctx = ScoringContext::new(RewardWeights::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let models: Vec<Box<dyn Generator>> = vec![
        Box::new(lm_train(&corpus, NgramConfig::default()).unwrap()),
        Box::new(ga_init(&mols, GaConfig::default(), &mut rng).unwrap()),
        Box::new(frag_build(&mols, FragmentConfig::default()).unwrap()),
    ];
    for mut g in models {
        for round in 0..2 {
            let batch = g.propose(200, &mut rng);
            let scored: Vec<Scored> = batch.iter().map(|s| Scored { smiles: s.clone(), reward: ctx.score_smiles(s).reward }).collect();
            let valid = scored.iter().filter(|s| mol_from_smiles(&s.smiles).is_ok()).count();
            let mean = scored.iter().map(|s| s.reward).sum::<f64>() / scored.len() as f64;
            println!("{:<9} round {round}: valid {valid}/200  mean reward {mean:.3}  e.g. {}", g.kind(), batch[0]);
            g.feedback(&scored);
        }
    }
}
