//! Canonical atom ranking and SMILES output.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use super::error::ChemError;
use super::mol::{permutation_parity, BondOrder, Chirality, Molecule, Neighbor};
use super::sanitize::allowed_valences;

/// Search budget for tie-breaking when stereo tags make symmetric choices matter.
const MAX_BRANCHES: usize = 64;

fn dense_rank<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0; keys.len()];
    let mut r = 0;
    for k in 0..order.len() {
        if k > 0 && keys[order[k]] != keys[order[k - 1]] {
            r += 1;
        }
        ranks[order[k]] = r;
    }
    ranks
}

fn class_count(ranks: &[usize]) -> usize {
    ranks.iter().max().map_or(0, |m| m + 1)
}

fn initial_invariants(mol: &Molecule) -> Vec<[i64; 8]> {
    (0..mol.atom_count())
        .map(|i| {
            let a = mol.atom(i);
            [
                mol.degree(i) as i64,
                a.element.atomic_number() as i64,
                a.isotope.map_or(0, |v| v as i64),
                a.charge as i64,
                a.implicit_h as i64,
                a.aromatic as i64,
                mol.is_ring_atom(i) as i64,
                a.map as i64,
            ]
        })
        .collect()
}

/// Stereo tag re-expressed against neighbours ordered by rank; 0 when ranks tie.
fn stereo_code(mol: &Molecule, i: usize, ranks: &[usize]) -> u8 {
    let tag = mol.atom(i).chirality;
    if !tag.is_set() {
        return 0;
    }
    let reference = mol.chiral_reference(i);
    let mut by_rank = reference.clone();
    by_rank.sort_by_key(|n| match n {
        Neighbor::ImplicitH => 0,
        Neighbor::Atom(a) => ranks[*a] + 1,
    });
    let distinct = by_rank.windows(2).all(|w| match (w[0], w[1]) {
        (Neighbor::Atom(x), Neighbor::Atom(y)) => ranks[x] != ranks[y],
        _ => true,
    });
    if !distinct {
        return 0;
    }
    match permutation_parity(&reference, &by_rank).map(|odd| tag.invert_if(odd)) {
        Some(Chirality::Ccw) => 1,
        Some(Chirality::Cw) => 2,
        _ => 0,
    }
}

fn refine(mol: &Molecule, mut ranks: Vec<usize>) -> Vec<usize> {
    loop {
        let before = class_count(&ranks);
        let keys: Vec<(usize, u8, Vec<(usize, u8)>)> = (0..mol.atom_count())
            .map(|i| {
                let mut nb: Vec<(usize, u8)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(n, b)| (ranks[n], mol.bond(b).order.code()))
                    .collect();
                nb.sort_unstable();
                (ranks[i], stereo_code(mol, i, &ranks), nb)
            })
            .collect();
        ranks = dense_rank(&keys);
        if class_count(&ranks) == before {
            return ranks;
        }
    }
}

fn break_tie(ranks: &[usize], chosen: usize) -> Vec<usize> {
    let keys: Vec<(usize, bool)> = ranks.iter().enumerate().map(|(i, &r)| (r, i != chosen)).collect();
    dense_rank(&keys)
}

fn lowest_tied_class(ranks: &[usize]) -> Option<Vec<usize>> {
    let mut counts = vec![0usize; ranks.len()];
    for &r in ranks {
        counts[r] += 1;
    }
    let r = counts.iter().position(|&c| c > 1)?;
    Some((0..ranks.len()).filter(|&i| ranks[i] == r).collect())
}

/// Atom classes from neighbourhood refinement alone, without tie-breaking.
///
/// Atoms in the same class are topologically equivalent.
pub fn symmetry_classes(mol: &Molecule) -> Vec<usize> {
    refine(mol, dense_rank(&initial_invariants(mol)))
}

/// Canonical ranks: a permutation of `0..n` that depends only on the graph.
pub fn canonical_ranks(mol: &Molecule) -> Vec<usize> {
    let mut ranks = refine(mol, dense_rank(&initial_invariants(mol)));
    while let Some(class) = lowest_tied_class(&ranks) {
        ranks = refine(mol, break_tie(&ranks, class[0]));
    }
    ranks
}

fn has_stereo(mol: &Molecule) -> bool {
    mol.atoms().iter().any(|a| a.chirality.is_set())
}

/// Canonical SMILES of a sanitized molecule.
pub fn canonical_smiles(mol: &Molecule) -> String {
    if mol.is_empty() {
        return String::new();
    }
    let start = refine(mol, dense_rank(&initial_invariants(mol)));
    if !has_stereo(mol) {
        let mut ranks = start;
        while let Some(class) = lowest_tied_class(&ranks) {
            ranks = refine(mol, break_tie(&ranks, class[0]));
        }
        return write_smiles(mol, &ranks);
    }
    let mut budget = MAX_BRANCHES;
    search(mol, start, &mut budget)
}

/// Canonical SMILES, rejecting molecules that have not been sanitized.
pub fn write_canonical(mol: &Molecule) -> Result<String, ChemError> {
    if !mol.is_sanitized() {
        return Err(ChemError::NotSanitized);
    }
    Ok(canonical_smiles(mol))
}

fn search(mol: &Molecule, ranks: Vec<usize>, budget: &mut usize) -> String {
    let Some(class) = lowest_tied_class(&ranks) else {
        *budget = budget.saturating_sub(1);
        return write_smiles(mol, &ranks);
    };
    let mut best: Option<String> = None;
    for (k, &m) in class.iter().enumerate() {
        if k > 0 && *budget == 0 {
            break;
        }
        let s = search(mol, refine(mol, break_tie(&ranks, m)), budget);
        if best.as_ref().map_or(true, |b| s < *b) {
            best = Some(s);
        }
    }
    best.expect("class is non-empty")
}

/// SMILES from a random atom ranking; parses back to the same molecule.
pub fn random_smiles<R: Rng + ?Sized>(mol: &Molecule, rng: &mut R) -> String {
    let mut ranks: Vec<usize> = (0..mol.atom_count()).collect();
    ranks.shuffle(rng);
    write_smiles(mol, &ranks)
}

/// Hydrogen count the reader would infer for an unbracketed atom.
fn implied_hydrogens(mol: &Molecule, i: usize) -> Option<u8> {
    let atom = mol.atom(i);
    if atom.element.is_dummy() {
        return Some(0);
    }
    let allowed = allowed_valences(atom.element, atom.charge)?;
    let sigma: u8 = mol.neighbors(i).iter().map(|(_, b)| mol.bond(*b).order.valence()).sum();
    if atom.aromatic && allowed[0] > sigma {
        return Some(allowed[0] - sigma - 1);
    }
    allowed.iter().find(|&&v| v >= sigma).map(|v| v - sigma)
}

fn needs_bracket(mol: &Molecule, i: usize) -> bool {
    let a = mol.atom(i);
    !(a.element.is_organic_subset() || a.element.is_dummy())
        || a.charge != 0
        || a.isotope.is_some()
        || a.map != 0
        || a.chirality.is_set()
        || implied_hydrogens(mol, i) != Some(a.implicit_h)
}

fn bond_symbol(mol: &Molecule, b: usize) -> &'static str {
    let bond = mol.bond(b);
    match bond.order {
        BondOrder::Aromatic => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Single => {
            if mol.atom(bond.begin).aromatic && mol.atom(bond.end).aromatic {
                "-"
            } else {
                ""
            }
        }
    }
}

struct Writer<'a> {
    mol: &'a Molecule,
    ranks: &'a [usize],
    visited: Vec<bool>,
    on_stack: Vec<bool>,
    children: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    /// Ring bonds at an atom as `(partner, bond, opens_here)`, in output order.
    closures: Vec<Vec<(usize, usize, bool)>>,
    digit_of_bond: Vec<Option<u8>>,
    digits_in_use: Vec<bool>,
    out: String,
}

/// Writes SMILES visiting atoms and branches in increasing `ranks` order.
pub fn write_smiles(mol: &Molecule, ranks: &[usize]) -> String {
    let n = mol.atom_count();
    let mut w = Writer {
        mol,
        ranks,
        visited: vec![false; n],
        on_stack: vec![false; n],
        children: vec![Vec::new(); n],
        parent: vec![None; n],
        closures: vec![Vec::new(); n],
        digit_of_bond: vec![None; mol.bond_count()],
        digits_in_use: vec![false; 100],
        out: String::new(),
    };
    let mut parts = Vec::new();
    for comp in mol.components() {
        let root = *comp.iter().min_by_key(|&&a| ranks[a]).expect("non-empty component");
        w.plan(root, None);
        w.order_closures(&comp);
        w.out.clear();
        w.emit(root);
        parts.push(std::mem::take(&mut w.out));
    }
    parts.sort();
    parts.join(".")
}

impl<'a> Writer<'a> {
    fn sorted_neighbors(&self, a: usize) -> Vec<(usize, usize)> {
        let mut nb = self.mol.neighbors(a).to_vec();
        nb.sort_by_key(|&(n, _)| self.ranks[n]);
        nb
    }

    fn plan(&mut self, a: usize, parent: Option<usize>) {
        self.visited[a] = true;
        self.on_stack[a] = true;
        self.parent[a] = parent;
        for (n, b) in self.sorted_neighbors(a) {
            if Some(n) == parent {
                continue;
            }
            if self.visited[n] {
                if self.on_stack[n] {
                    self.closures[n].push((a, b, true));
                    self.closures[a].push((n, b, false));
                }
                continue;
            }
            self.children[a].push(n);
            self.plan(n, Some(a));
        }
        self.on_stack[a] = false;
    }

    fn order_closures(&mut self, comp: &[usize]) {
        for &a in comp {
            let ranks = self.ranks;
            // Closings first, then openings; each group by partner rank.
            self.closures[a].sort_by_key(|&(p, _, opens)| (opens, ranks[p]));
        }
    }

    fn emit(&mut self, a: usize) {
        self.write_atom(a);
        let closures = self.closures[a].clone();
        let mut freed = Vec::new();
        for &(_, b, opens) in &closures {
            if opens {
                let d = (1..100).find(|&d| !self.digits_in_use[d]).unwrap_or(99);
                self.digits_in_use[d] = true;
                self.digit_of_bond[b] = Some(d as u8);
                self.write_digit(d as u8);
            } else {
                let d = self.digit_of_bond[b].expect("ring opened before closing");
                self.out.push_str(bond_symbol(self.mol, b));
                self.write_digit(d);
                freed.push(d);
            }
        }
        for d in freed {
            self.digits_in_use[d as usize] = false;
        }
        let children = self.children[a].clone();
        for (k, &c) in children.iter().enumerate() {
            let b = self.mol.bond_between(a, c).expect("tree edge");
            let last = k + 1 == children.len();
            if !last {
                self.out.push('(');
            }
            self.out.push_str(bond_symbol(self.mol, b));
            self.emit(c);
            if !last {
                self.out.push(')');
            }
        }
    }

    fn write_digit(&mut self, d: u8) {
        if d < 10 {
            let _ = write!(self.out, "{d}");
        } else {
            let _ = write!(self.out, "%{d:02}");
        }
    }

    /// Neighbour order as it will appear in the text.
    fn written_order(&self, a: usize) -> Vec<Neighbor> {
        let mut order = Vec::with_capacity(4);
        if let Some(p) = self.parent[a] {
            order.push(Neighbor::Atom(p));
        }
        if self.mol.atom(a).implicit_h > 0 {
            order.push(Neighbor::ImplicitH);
        }
        for &(p, _, _) in &self.closures[a] {
            order.push(Neighbor::Atom(p));
        }
        for &c in &self.children[a] {
            order.push(Neighbor::Atom(c));
        }
        order
    }

    fn write_atom(&mut self, a: usize) {
        let atom = self.mol.atom(a);
        let symbol = atom.element.symbol();
        let sym = if atom.aromatic { symbol.to_ascii_lowercase() } else { symbol.to_string() };
        if !needs_bracket(self.mol, a) {
            self.out.push_str(&sym);
            return;
        }
        self.out.push('[');
        if let Some(iso) = atom.isotope {
            let _ = write!(self.out, "{iso}");
        }
        self.out.push_str(&sym);
        if atom.chirality.is_set() {
            let written = self.written_order(a);
            let reference = self.mol.chiral_reference(a);
            match permutation_parity(&reference, &written).map(|odd| atom.chirality.invert_if(odd)) {
                Some(Chirality::Ccw) => self.out.push('@'),
                Some(Chirality::Cw) => self.out.push_str("@@"),
                _ => {}
            }
        }
        match atom.implicit_h {
            0 => {}
            1 => self.out.push('H'),
            h => {
                let _ = write!(self.out, "H{h}");
            }
        }
        match atom.charge {
            0 => {}
            1 => self.out.push('+'),
            -1 => self.out.push('-'),
            c if c > 0 => {
                let _ = write!(self.out, "+{c}");
            }
            c => {
                let _ = write!(self.out, "-{}", -c);
            }
        }
        if atom.map != 0 {
            let _ = write!(self.out, ":{}", atom.map);
        }
        self.out.push(']');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::sanitize::mol_from_smiles;

    fn canon(s: &str) -> String {
        canonical_smiles(&mol_from_smiles(s).unwrap())
    }

    #[test]
    fn simple_forms() {
        assert_eq!(canon("OCC"), "CCO");
        assert_eq!(canon("C1=CC=CC=C1"), "c1ccccc1");
        assert_eq!(canon("[NH4+]"), "[NH4+]");
        assert_eq!(canon("c1cc[nH]c1"), canon("[nH]1cccc1"));
        assert_eq!(canon("O.CC"), "CC.O");
    }

    #[test]
    fn equal_molecules_agree() {
        let pairs = [
            ("CC(=O)Oc1ccccc1C(=O)O", "OC(=O)c1ccccc1OC(C)=O"),
            ("c1ccc2ccccc2c1", "C1=CC2=CC=CC=C2C=C1"),
            ("N[C@@H](C)C(=O)O", "OC(=O)[C@@H](N)C"),
            ("C[C@H]1CC[C@@H](C)CC1", "C[C@@H]1CC[C@H](C)CC1"),
        ];
        for (a, b) in pairs {
            assert_eq!(canon(a), canon(b), "{a} vs {b}");
        }
        assert_ne!(canon("N[C@@H](C)C(=O)O"), canon("N[C@H](C)C(=O)O"));
    }

    #[test]
    fn output_reparses_to_fixed_point() {
        for s in ["CC(C)(C)c1ccc(O)cc1", "C1CC2CCC1C2", "O=c1cccc[nH]1", "C[S+](C)[O-]", "[13CH3]O", "c1ccc2c(c1)-c1ccccc1-2"] {
            let once = canon(s);
            assert_eq!(canon(&once), once, "{s}");
        }
    }

    #[test]
    fn ranks_are_a_permutation() {
        let m = mol_from_smiles("CC(C)C").unwrap();
        let mut r = canonical_ranks(&m);
        r.sort_unstable();
        assert_eq!(r, vec![0, 1, 2, 3]);
    }
}
