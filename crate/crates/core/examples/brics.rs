//! Retrosynthetic BRICS fragmentation, exact reassembly and random recombination.
//!
//!     cargo run --example brics -- 'CC(=O)Nc1ccc(OCC(=O)N2CCOCC2)cc1'

use molforge::molgraph::{brics_fragment, brics_recombine, canonical_smiles, mol_from_smiles, reassemble};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let smiles = std::env::args().nth(1).unwrap_or_else(|| "CC(=O)Nc1ccc(OCC(=O)N2CCOCC2)cc1".into());
    let mol = mol_from_smiles(&smiles).unwrap_or_else(|e| panic!("{smiles}: {e}"));
    let frags = brics_fragment(&mol);
    println!("{} -> {} fragments", canonical_smiles(&mol), frags.len());
    for f in &frags {
        println!("  {}", f.smiles());
    }
    let back = reassemble(&frags).expect("original pairing always reassembles");
    println!("reassembled {}", canonical_smiles(&back));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        match brics_recombine(&frags, &mut rng) {
            Ok(m) => println!("recombined  {}", canonical_smiles(&m)),
            Err(e) => println!("recombined  failed: {e}"),
        }
    }
}
