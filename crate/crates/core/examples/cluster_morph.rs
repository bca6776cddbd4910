//! Butina chemotype clustering of the bundled corpus, then bioisosteric and
//! metabolic variants of one cluster leader.
//!
//!     cargo run --release --example cluster_morph -- 0.4

use molforge::data;
use molforge::molgraph::{canonical_smiles, fingerprint, mol_from_smiles};
use molforge::scoring::{butina, morph, MorphMode, MorphRules};

fn main() {
    let threshold: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.4);
    let mols: Vec<_> = data::lines(data::embedded(data::CORPUS).unwrap()).filter_map(|(_, l)| mol_from_smiles(l.split_whitespace().next()?).ok()).collect();
    let fps: Vec<_> = mols.iter().map(fingerprint).collect();
    let c = butina(&fps, threshold);
    println!("{} molecules, {} chemotypes at distance {threshold}", mols.len(), c.n_chemotypes);
    if let Some(s) = c.mean_intra_similarity {
        println!("mean intra-cluster similarity {s:.3}");
    }
    for members in c.clusters.iter().take(5) {
        println!("  {:>3} members, leader {}", members.len(), canonical_smiles(&mols[members[0]]));
    }

    // the leader among the ten largest clusters with the most variants
    let leader = c
        .clusters
        .iter()
        .take(10)
        .map(|m| &mols[m[0]])
        .max_by_key(|m| morph(m, MorphRules::shipped(), MorphMode::Bioisostere).variants.len() + morph(m, MorphRules::shipped(), MorphMode::Metabolic).variants.len())
        .expect("at least one cluster");
    println!("morphing {}", canonical_smiles(leader));
    for mode in [MorphMode::Bioisostere, MorphMode::Metabolic] {
        let out = morph(leader, MorphRules::shipped(), mode);
        println!("{mode:?}: {} variants ({} dropped)", out.variants.len(), out.dropped);
        for v in out.variants.iter().take(6) {
            println!("  {:<6} {}", v.rule_id, v.smiles);
        }
    }
}
