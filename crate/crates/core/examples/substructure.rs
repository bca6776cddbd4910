//! SMARTS matching and Murcko scaffolds.
//!
//!     cargo run --example substructure -- '[CX3](=O)[OX2H1]' 'OC(=O)c1ccccc1C(O)=O'

use molforge::molgraph::{canonical_smiles, mol_from_smiles, murcko_scaffold, Pattern};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (smarts, smiles) = match args.as_slice() {
        [p, rest @ ..] if !rest.is_empty() => (p.clone(), rest.to_vec()),
        _ => (
            "[CX3](=O)[OX2H1]".to_string(),
            vec!["OC(=O)c1ccccc1C(O)=O".into(), "CC(=O)Oc1ccccc1C(=O)O".into(), "c1ccc2[nH]ccc2c1".into()],
        ),
    };
    let pattern = Pattern::parse(&smarts).unwrap_or_else(|e| panic!("{smarts}: {e}"));
    println!("pattern {} ({} atoms)", pattern.source(), pattern.atom_count());
    for s in &smiles {
        let mol = mol_from_smiles(s).unwrap_or_else(|e| panic!("{s}: {e}"));
        let hits = pattern.find_all(&mol);
        println!("{:<28} {} match(es) {:?}", canonical_smiles(&mol), hits.len(), hits);
        println!("{:<28} scaffold {}", "", canonical_smiles(&murcko_scaffold(&mol)));
    }
}
