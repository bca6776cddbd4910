mod common;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use molforge::benchmark::benchmark_report;
use molforge::molgraph::{canonical_smiles, descriptors, fingerprint, mol_from_smiles, similarity, tanimoto, Metric, Molecule};
use molforge::scoring::{
    butina, flex, mce18, mcf_screen, morph, som_train, Component, McfRuleSet, MorphMode, MorphRules, RewardWeights, ScoringContext,
    SomConfig,
};
use molforge::scoring::reward::weighted_mean;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{corpus, shuffled_perm};

fn mols() -> &'static [(String, Molecule)] {
    static CORPUS: OnceLock<Vec<(String, Molecule)>> = OnceLock::new();
    CORPUS.get_or_init(corpus)
}

fn scorer() -> &'static ScoringContext {
    static CTX: OnceLock<ScoringContext> = OnceLock::new();
    CTX.get_or_init(|| ScoringContext::new(RewardWeights::default()).unwrap())
}

fn shuffle(m: &Molecule, seed: u64) -> Molecule {
    m.permuted(&shuffled_perm(m.atom_count(), &mut ChaCha8Rng::seed_from_u64(seed)))
}

fn pick() -> impl Strategy<Value = usize> {
    0..mols().len()
}

const COMPONENTS: [Component; 4] = [Component::DrugLikeness, Component::Properties, Component::Synthesis, Component::Mce18];

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn atom_order_never_changes_results(i in pick(), seed in any::<u64>()) {
        let m = &mols()[i].1;
        let p = shuffle(m, seed);
        prop_assert_eq!(canonical_smiles(&p), canonical_smiles(m));
        prop_assert_eq!(fingerprint(&p), fingerprint(m));
        prop_assert_eq!(descriptors(&p).unwrap(), descriptors(m).unwrap());
        prop_assert_eq!(mce18(&p), mce18(m));
        prop_assert_eq!(flex(&descriptors(&p).unwrap()), flex(&descriptors(m).unwrap()));
        prop_assert_eq!(mcf_screen(&p, McfRuleSet::shipped()), mcf_screen(m, McfRuleSet::shipped()));
        prop_assert_eq!(scorer().score_full(&p), scorer().score_full(m));
    }

    #[test]
    fn canonical_form_round_trips(i in pick()) {
        let c = canonical_smiles(&mols()[i].1);
        prop_assert_eq!(canonical_smiles(&mol_from_smiles(&c).unwrap()), c);
    }

    #[test]
    fn similarity_is_symmetric_and_bounded(i in pick(), j in pick()) {
        let (a, b) = (fingerprint(&mols()[i].1), fingerprint(&mols()[j].1));
        for metric in [Metric::Tanimoto, Metric::Cosine] {
            let s = similarity(&a, &b, metric).unwrap();
            prop_assert_eq!(s, similarity(&b, &a, metric).unwrap());
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(similarity(&a, &a, metric).unwrap(), 1.0);
        }
        prop_assert_eq!(a.popcount() as usize, a.ones().count());
    }

    #[test]
    fn descriptor_counts_are_consistent(i in pick()) {
        let d = descriptors(&mols()[i].1).unwrap();
        prop_assert_eq!(d.heavy_atoms, d.carbons + d.heteroatoms);
        prop_assert!((0.0..=1.0).contains(&d.fraction_sp3));
    }

    #[test]
    fn scored_reports_respect_gates(i in pick()) {
        let r = scorer().score_full(&mols()[i].1);
        prop_assert!((0.0..=1.0).contains(&r.reward));
        if r.hard_fail {
            prop_assert_eq!(r.reward, 0.0);
        }
    }

    #[test]
    fn reward_is_monotone_in_each_component(
        scores in prop::collection::vec(0.0f64..=1.0, 4),
        weights in prop::collection::vec(0.0f64..3.0, 4),
        which in 0usize..4,
        bump in 0.0f64..=1.0,
    ) {
        let mut w = RewardWeights::default();
        w.weights = COMPONENTS.iter().copied().zip(weights).collect();
        let mut s: BTreeMap<Component, f64> = COMPONENTS.iter().copied().zip(scores).collect();
        let before = weighted_mean(&s, &w);
        let c = COMPONENTS[which];
        s.insert(c, (s[&c] + bump).min(1.0));
        prop_assert!(weighted_mean(&s, &w) >= before - 1e-12);
    }

    #[test]
    fn morph_variants_sanitize(i in pick()) {
        let m = &mols()[i].1;
        for mode in [MorphMode::Bioisostere, MorphMode::Metabolic] {
            for v in morph(m, MorphRules::shipped(), mode).variants {
                prop_assert!(mol_from_smiles(&v.smiles).is_ok(), "{}", v.smiles);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, ..ProptestConfig::default() })]

    #[test]
    fn alkane_homologues_differ_by_ch2(n in 2usize..40) {
        let mw = |k: usize| descriptors(&mol_from_smiles(&"C".repeat(k)).unwrap()).unwrap().mw;
        prop_assert!((mw(n) - mw(n - 1) - 14.03).abs() <= 0.01);
    }

    #[test]
    fn butina_members_stay_near_their_leader(seed in any::<u64>(), size in 1usize..120, threshold in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fps: Vec<_> = mols().choose_multiple(&mut rng, size).map(|(_, m)| fingerprint(m)).collect();
        let c = butina(&fps, threshold);
        prop_assert_eq!(&c, &butina(&fps, threshold));
        prop_assert_eq!(c.n_chemotypes, c.clusters.len());
        for (id, members) in c.clusters.iter().enumerate() {
            for &m in members {
                prop_assert_eq!(c.assignment[m], id);
                prop_assert!(1.0 - tanimoto(&fps[members[0]], &fps[m]).unwrap() <= threshold + 1e-12);
            }
        }
    }

    #[test]
    fn som_training_is_reproducible(seed in any::<u64>()) {
        let vectors: Vec<Vec<f64>> = mols().iter().step_by(20).map(|(_, m)| descriptors(m).unwrap().to_vec()).collect();
        let labels: Vec<String> = (0..vectors.len()).map(|i| (i % 3).to_string()).collect();
        let cfg = SomConfig { width: 5, height: 4, epochs: 3, ..SomConfig::default() };
        let a = som_train(&vectors, &labels, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = som_train(&vectors, &labels, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn benchmark_ignores_batch_order(seed in any::<u64>(), size in 1usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reference: Vec<&str> = mols().iter().step_by(10).map(|(s, _)| s.as_str()).collect();
        let training: Vec<&str> = mols().iter().skip(5).step_by(10).map(|(s, _)| s.as_str()).collect();
        let mut batch: Vec<&str> = mols().choose_multiple(&mut rng, size).map(|(s, _)| s.as_str()).collect();
        batch.push("not a molecule");
        let a = benchmark_report(&[("m".to_string(), batch.clone())], &reference, &training, None);
        batch.shuffle(&mut rng);
        let b = benchmark_report(&[("m".to_string(), batch)], &reference, &training, None);
        prop_assert_eq!(a, b);
    }
}
