//! Parse SMILES, print the canonical form, a few equivalent spellings,
//! descriptors and pairwise Tanimoto similarity.
//!
//!     cargo run --example canonicalize -- 'OC(=O)c1ccccc1OC(C)=O' 'CC(=O)Nc1ccc(O)cc1'

use molforge::molgraph::{canonical_smiles, descriptors, fingerprint, mol_from_smiles, random_smiles, tanimoto};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut inputs: Vec<String> = std::env::args().skip(1).collect();
    if inputs.is_empty() {
        inputs = vec!["OC(=O)c1ccccc1OC(C)=O".into(), "CC(=O)Nc1ccc(O)cc1".into(), "C1=CC=CC=C1".into()];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut fps = Vec::new();
    for s in &inputs {
        let mol = match mol_from_smiles(s) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("{s}: {e}");
                continue;
            }
        };
        let canon = canonical_smiles(&mol);
        println!("{s}\n  canonical  {canon}");
        for _ in 0..3 {
            let alt = random_smiles(&mol, &mut rng);
            let back = canonical_smiles(&mol_from_smiles(&alt).expect("random spelling parses"));
            println!("  spelling   {alt:<30} -> {back}");
        }
        let d = descriptors(&mol).expect("sanitized molecule");
        println!(
            "  mw {:.2}  logP~ {:.2}  TPSA~ {:.1}  HBD {}  HBA {}  rot {}  Fsp3 {:.2}",
            d.mw, d.logp_est, d.tpsa_est, d.hbd, d.hba, d.rotatable_bonds, d.fraction_sp3
        );
        fps.push((canon, fingerprint(&mol)));
    }
    for i in 0..fps.len() {
        for j in i + 1..fps.len() {
            println!("tanimoto({}, {}) = {:.3}", fps[i].0, fps[j].0, tanimoto(&fps[i].1, &fps[j].1).unwrap());
        }
    }
}
