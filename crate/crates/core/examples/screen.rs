//! Full 2D scoring of a handful of molecules: filters, rules, complexity,
//! synthetic accessibility and the combined reward.
//!
//!     cargo run --example screen

use molforge::molgraph::mol_from_smiles;
use molforge::scoring::{mcf_screen, McfRuleSet, RewardWeights, ScoringContext};

const MOLECULES: [(&str, &str); 5] = [
    ("aspirin", "CC(=O)Oc1ccccc1C(=O)O"),
    ("imatinib", "Cc1ccc(NC(=O)c2ccc(CN3CCN(C)CC3)cc2)cc1Nc1nccc(-c2cccnc2)n1"),
    ("acyl chloride", "CC(C)CC(=O)Cl"),
    ("nitro arene", "O=[N+]([O-])c1ccc(Cl)cc1"),
    ("long alkane", "CCCCCCCCCCCCCCCCCCCC"),
];

fn main() {
    let ctx = ScoringContext::new(RewardWeights::default()).expect("default weights are valid");
    for (name, smiles) in MOLECULES {
        let mol = mol_from_smiles(smiles).expect("curated input");
        let r = ctx.score_full(&mol);
        let verdict = mcf_screen(&mol, McfRuleSet::shipped());
        println!("{name} ({})", r.canonical_smiles);
        println!("  filters   pass={} hard={:?} soft={:?}", verdict.pass, verdict.hard_hits, verdict.soft_hits);
        if let Some(ro5) = &r.ro5 {
            println!("  ro5       violations {}", ro5.violations);
        }
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
        println!(
            "  scores    drug-likeness {}  MCE-18 {}  ReRSA {}  flex {}",
            opt(r.drug_likeness),
            opt(r.mce18),
            opt(r.rersa),
            opt(r.flex)
        );
        println!("  reward    {:.3}{}", r.reward, if r.hard_fail { "  (hard fail)" } else { "" });
    }
}
