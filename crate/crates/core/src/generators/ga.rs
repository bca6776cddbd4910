//! Graph genetic algorithm: tournament selection, elitism, BRICS crossover
//! and a small set of valence-checked mutation operators.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::error::GeneratorError;
use super::{from_json, round_trip, to_json, Generator, Scored};
use crate::molgraph::{
    brics_fragment, brics_recombine, canonical_smiles, mol_from_smiles, sanitize, Atom, BondOrder, Element, Fragment, Molecule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    ElementSwap,
    BondOrder,
    AppendAtom,
    DeleteAtom,
    RingClosure,
    FragmentReplace,
}

impl Mutation {
    pub const ALL: [Mutation; 6] =
        [Mutation::ElementSwap, Mutation::BondOrder, Mutation::AppendAtom, Mutation::DeleteAtom, Mutation::RingClosure, Mutation::FragmentReplace];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub tournament: usize,
    pub elite_fraction: f64,
    pub crossover: f64,
    pub mutation: f64,
    pub max_retries: usize,
    /// Relative operator weights, in [`Mutation::ALL`] order.
    pub mutation_weights: [f64; 6],
    pub max_heavy_atoms: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 200,
            tournament: 3,
            elite_fraction: 0.05,
            crossover: 0.6,
            mutation: 0.3,
            max_retries: 10,
            mutation_weights: [1.0; 6],
            max_heavy_atoms: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct State {
    cfg: GaConfig,
    population: Vec<String>,
    fitness: Option<Vec<f64>>,
    /// Fragment SMILES used by the replacement operator.
    library: Vec<String>,
    epoch: u32,
}

#[derive(Debug, Clone)]
pub struct GaModel {
    state: State,
    library: Vec<Fragment>,
}

const APPEND_ELEMENTS: [Element; 7] = [Element::C, Element::C, Element::C, Element::N, Element::O, Element::F, Element::CL];
const SWAP_ELEMENTS: [Element; 6] = [Element::C, Element::N, Element::O, Element::S, Element::F, Element::CL];

impl GaModel {
    fn from_state(state: State) -> GaModel {
        let library = state.library.iter().filter_map(|s| Fragment::from_smiles(s).ok()).collect();
        GaModel { state, library }
    }

    pub fn population(&self) -> &[String] {
        &self.state.population
    }

    pub fn fitness(&self) -> Option<&[f64]> {
        self.state.fitness.as_deref()
    }

    pub fn epoch(&self) -> u32 {
        self.state.epoch
    }

    pub fn config(&self) -> &GaConfig {
        &self.state.cfg
    }

    fn tournament(&self, fitness: &[f64], rng: &mut ChaCha8Rng) -> usize {
        let n = self.state.population.len();
        let mut best = rng.gen_range(0..n);
        for _ in 1..self.state.cfg.tournament.max(1) {
            let c = rng.gen_range(0..n);
            if fitness[c] > fitness[best] || (fitness[c] == fitness[best] && c < best) {
                best = c;
            }
        }
        best
    }

    fn child(&self, parents: &[Molecule], fitness: &[f64], rng: &mut ChaCha8Rng) -> String {
        let cfg = &self.state.cfg;
        let p1 = self.tournament(fitness, rng);
        for _ in 0..cfg.max_retries {
            let mut child = if rng.gen::<f64>() < cfg.crossover {
                let p2 = self.tournament(fitness, rng);
                match crossover(&parents[p1], &parents[p2], rng) {
                    Some(c) => c,
                    None => continue,
                }
            } else {
                parents[p1].clone()
            };
            if rng.gen::<f64>() < cfg.mutation {
                match mutate(&child, &cfg.mutation_weights, &self.library, rng) {
                    Some(m) => child = m,
                    None => continue,
                }
            }
            if !child.is_empty() && !child.is_multi_fragment() && child.heavy_atom_count() <= cfg.max_heavy_atoms {
                if let Some(s) = round_trip(&child) {
                    return s;
                }
            }
        }
        self.state.population[p1].clone()
    }
}

/// Seeds the population by sampling seeds with replacement, mutating each once.
pub fn ga_init(seeds: &[Molecule], cfg: GaConfig, rng: &mut ChaCha8Rng) -> Result<GaModel, GeneratorError> {
    let seeds: Vec<&Molecule> =
        seeds.iter().filter(|m| m.is_sanitized() && !m.is_empty() && !m.is_multi_fragment() && round_trip(m).is_some()).collect();
    if seeds.is_empty() {
        return Err(GeneratorError::NoValidSeeds);
    }
    if cfg.population_size == 0 || cfg.tournament == 0 || cfg.mutation_weights.iter().any(|w| *w < 0.0) || cfg.mutation_weights.iter().all(|w| *w == 0.0) {
        return Err(GeneratorError::InvalidConfig("population_size and tournament must be positive; mutation weights non-negative, not all zero".into()));
    }
    let mut library: Vec<String> = seeds.iter().flat_map(|m| brics_fragment(m)).filter(|f| !f.attachments.is_empty()).map(|f| f.smiles()).collect();
    library.sort();
    library.dedup();
    let mut model = GaModel::from_state(State { cfg, population: Vec::new(), fitness: None, library, epoch: 0 });
    let size = model.state.cfg.population_size;
    let mut population = Vec::with_capacity(size);
    for _ in 0..size {
        let seed = *seeds.choose(rng).expect("non-empty seeds");
        let mut member = canonical_smiles(seed);
        for _ in 0..model.state.cfg.max_retries {
            if let Some(m) = mutate(seed, &model.state.cfg.mutation_weights, &model.library, rng) {
                if let Some(s) = (!m.is_multi_fragment() && !m.is_empty()).then(|| round_trip(&m)).flatten() {
                    member = s;
                    break;
                }
            }
        }
        population.push(member);
    }
    model.state.population = population;
    Ok(model)
}

/// One generation. Returns the new population, which also replaces the old one.
pub fn ga_epoch(model: &mut GaModel, fitness: &[f64], rng: &mut ChaCha8Rng) -> Vec<String> {
    let n = model.state.population.len();
    assert_eq!(fitness.len(), n, "fitness must align with the population");
    let parents: Vec<Molecule> = model.state.population.iter().map(|s| mol_from_smiles(s).expect("population members are valid")).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then_with(|| model.state.population[a].cmp(&model.state.population[b])));
    let n_elite = ((n as f64 * model.state.cfg.elite_fraction).round() as usize).clamp(1, n);
    let mut next: Vec<String> = order[..n_elite].iter().map(|&i| model.state.population[i].clone()).collect();
    while next.len() < n {
        next.push(model.child(&parents, fitness, rng));
    }
    model.state.population = next.clone();
    model.state.fitness = None;
    model.state.epoch += 1;
    next
}

fn crossover(a: &Molecule, b: &Molecule, rng: &mut ChaCha8Rng) -> Option<Molecule> {
    let fa = brics_fragment(a);
    let fb = brics_fragment(b);
    if fa.len() < 2 || fb.is_empty() {
        return None;
    }
    let drop = rng.gen_range(0..fa.len());
    let mut pool: Vec<Fragment> = fa.into_iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, f)| f).collect();
    pool.push(fb.choose(rng)?.clone());
    brics_recombine(&pool, rng).ok()
}

fn pick_mutation(weights: &[f64; 6], rng: &mut ChaCha8Rng) -> Mutation {
    let total: f64 = weights.iter().sum();
    let mut r = rng.gen::<f64>() * total;
    for (m, w) in Mutation::ALL.iter().zip(weights) {
        if r < *w {
            return *m;
        }
        r -= w;
    }
    Mutation::ALL[weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)]
}

/// Applies one randomly chosen operator; `None` if it produced nothing valid.
pub fn mutate(mol: &Molecule, weights: &[f64; 6], library: &[Fragment], rng: &mut ChaCha8Rng) -> Option<Molecule> {
    let op = pick_mutation(weights, rng);
    apply_mutation(mol, op, library, rng)
}

pub fn apply_mutation(mol: &Molecule, op: Mutation, library: &[Fragment], rng: &mut ChaCha8Rng) -> Option<Molecule> {
    let heavy: Vec<usize> = (0..mol.atom_count()).filter(|&i| mol.atom(i).is_heavy()).collect();
    if heavy.is_empty() {
        return None;
    }
    let mut work = mol.to_editable();
    match op {
        Mutation::ElementSwap => {
            let i = *heavy.choose(rng)?;
            let el = **SWAP_ELEMENTS.iter().filter(|e| **e != mol.atom(i).element).collect::<Vec<_>>().choose(rng)?;
            let atom = work.atom_mut(i);
            atom.element = el;
            atom.charge = 0;
            atom.isotope = None;
            atom.h_fixed = false;
            atom.chirality = crate::molgraph::Chirality::None;
        }
        Mutation::BondOrder => {
            let b = rng.gen_range(0..mol.bond_count().max(1));
            if b >= mol.bond_count() {
                return None;
            }
            let bond = mol.bond(b);
            let new = match bond.kekule {
                BondOrder::Single => {
                    if mol.atom(bond.begin).implicit_h == 0 || mol.atom(bond.end).implicit_h == 0 {
                        return None;
                    }
                    BondOrder::Double
                }
                BondOrder::Double | BondOrder::Triple => BondOrder::Single,
                BondOrder::Aromatic => return None,
            };
            if bond.order == BondOrder::Aromatic {
                return None;
            }
            for a in [bond.begin, bond.end] {
                if work.atom(a).h_fixed {
                    return None;
                }
            }
            let wb = work.bond_mut(b);
            wb.order = new;
            wb.kekule = new;
        }
        Mutation::AppendAtom => {
            let sites: Vec<usize> = heavy.iter().copied().filter(|&i| mol.atom(i).implicit_h > 0).collect();
            let i = *sites.choose(rng)?;
            let new = work.add_atom(Atom::new(*APPEND_ELEMENTS.choose(rng)?));
            work.add_bond(i, new, BondOrder::Single).ok()?;
            if work.atom(i).h_fixed {
                work.atom_mut(i).implicit_h -= 1;
            }
        }
        Mutation::DeleteAtom => {
            if heavy.len() < 3 {
                return None;
            }
            let leaves: Vec<usize> = heavy.iter().copied().filter(|&i| mol.heavy_degree(i) == 1).collect();
            let i = *leaves.choose(rng)?;
            for &(j, b) in mol.neighbors(i) {
                if work.atom(j).h_fixed && work.atom(j).is_heavy() {
                    work.atom_mut(j).implicit_h += mol.bond(b).kekule.valence();
                }
            }
            let drop: Vec<usize> = std::iter::once(i).chain(mol.neighbors(i).iter().map(|(j, _)| *j).filter(|&j| mol.atom(j).element.is_hydrogen())).collect();
            work = work.remove_atoms(&drop);
        }
        Mutation::RingClosure => {
            let sites: Vec<usize> = heavy.iter().copied().filter(|&i| mol.atom(i).implicit_h > 0 && !work.atom(i).h_fixed).collect();
            let mut pairs = Vec::new();
            for &a in &sites {
                let dist = distances(mol, a);
                for &b in &sites {
                    if b > a && (3..=5).contains(&dist[b]) {
                        pairs.push((a, b));
                    }
                }
            }
            let &(a, b) = pairs.choose(rng)?;
            work.add_bond(a, b, BondOrder::Single).ok()?;
        }
        Mutation::FragmentReplace => {
            let frags = brics_fragment(mol);
            if frags.len() < 2 || library.is_empty() {
                return None;
            }
            let k = rng.gen_range(0..frags.len());
            let mut pool: Vec<Fragment> = frags.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, f)| f.clone()).collect();
            pool.push(library.choose(rng)?.clone());
            return brics_recombine(&pool, rng).ok();
        }
    }
    sanitize(&mut work).ok()?;
    Some(work)
}

fn distances(mol: &Molecule, from: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; mol.atom_count()];
    dist[from] = 0;
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(i) = queue.pop_front() {
        for &(j, _) in mol.neighbors(i) {
            if dist[j] == usize::MAX {
                dist[j] = dist[i] + 1;
                queue.push_back(j);
            }
        }
    }
    dist
}

impl Generator for GaModel {
    fn kind(&self) -> &'static str {
        "ga"
    }

    /// The current population, after breeding a new one if fitness is known.
    fn propose(&mut self, n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
        if let Some(fitness) = self.state.fitness.clone() {
            ga_epoch(self, &fitness, rng);
        }
        self.state.population.iter().cycle().take(n).cloned().collect()
    }

    /// Fitness per member is the reward of its SMILES; unscored members get 0.
    fn feedback(&mut self, scored: &[Scored]) {
        let rewards: std::collections::HashMap<&str, f64> = scored.iter().map(|s| (s.smiles.as_str(), s.reward)).collect();
        self.state.fitness = Some(self.state.population.iter().map(|s| rewards.get(s.as_str()).copied().unwrap_or(0.0)).collect());
    }

    fn save(&self) -> String {
        to_json(&self.state)
    }

    fn restore(&mut self, payload: &str) -> Result<(), GeneratorError> {
        *self = GaModel::from_state(from_json(payload)?);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::descriptors;
    use rand::SeedableRng;

    fn seeds() -> Vec<Molecule> {
        ["CC(=O)Nc1ccc(O)cc1", "CCOC(=O)c1ccccc1", "c1ccc2[nH]ccc2c1", "CCN(CC)CCOC(=O)c1ccc(N)cc1"]
            .iter()
            .map(|s| mol_from_smiles(s).unwrap())
            .collect()
    }

    #[test]
    fn every_operator_yields_valid_molecules() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lib: Vec<Fragment> = seeds().iter().flat_map(brics_fragment).collect();
        for op in Mutation::ALL {
            let mut produced = 0;
            for s in seeds() {
                for _ in 0..20 {
                    if let Some(m) = apply_mutation(&s, op, &lib, &mut rng) {
                        assert!(m.is_sanitized());
                        assert!(mol_from_smiles(&canonical_smiles(&m)).is_ok(), "{op:?}");
                        produced += 1;
                    }
                }
            }
            assert!(produced > 0, "{op:?} never applied");
        }
    }

    #[test]
    fn population_size_and_elitism() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = GaConfig { population_size: 40, ..GaConfig::default() };
        let mut ga = ga_init(&seeds(), cfg, &mut rng).unwrap();
        let fit = |s: &str| descriptors(&mol_from_smiles(s).unwrap()).unwrap().fraction_sp3;
        let mut best = f64::MIN;
        for _ in 0..5 {
            let f: Vec<f64> = ga.population().iter().map(|s| fit(s)).collect();
            let max = f.iter().cloned().fold(f64::MIN, f64::max);
            assert!(max >= best);
            best = max;
            let next = ga_epoch(&mut ga, &f, &mut rng);
            assert_eq!(next.len(), 40);
        }
    }

    #[test]
    fn no_valid_seeds() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(ga_init(&[], GaConfig::default(), &mut rng), Err(GeneratorError::NoValidSeeds)));
    }
}
