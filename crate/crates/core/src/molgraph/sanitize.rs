//! Kekulization, valence checking, hydrogen inference, ring perception and
//! aromaticity.

use std::collections::HashMap;

use once_cell::sync::Lazy;

use super::element::Element;
use super::error::{ChemError, SanitizeError};
use super::mol::{permutation_parity, BondOrder, Chirality, Molecule, Neighbor};
use super::rings::find_sssr;
use super::smiles::parse_smiles;
use crate::data;

type ValenceTable = HashMap<(u8, i8), Vec<u8>>;

static VALENCES: Lazy<ValenceTable> = Lazy::new(|| parse_valence_table(&data::table(data::VALENCE)));

fn parse_valence_table(text: &str) -> ValenceTable {
    let mut out = HashMap::new();
    for (line_no, line) in data::lines(text) {
        let mut fields = line.split_whitespace();
        let parsed = (|| {
            let element = Element::from_symbol(fields.next()?)?;
            let charge: i8 = fields.next()?.parse().ok()?;
            let vals: Vec<u8> = fields.map(|f| f.parse().ok()).collect::<Option<_>>()?;
            (!vals.is_empty()).then_some(((element.atomic_number(), charge), vals))
        })();
        match parsed {
            Some((k, v)) => {
                out.insert(k, v);
            }
            None => log::warn!("valence table line {line_no} ignored: {line:?}"),
        }
    }
    out
}

/// Allowed valences for an element in a charge state, if tabulated.
pub fn allowed_valences(element: Element, charge: i8) -> Option<&'static [u8]> {
    VALENCES.get(&(element.atomic_number(), charge)).map(|v| v.as_slice())
}

/// Parses and sanitizes in one step.
pub fn mol_from_smiles(text: &str) -> Result<Molecule, ChemError> {
    let mut mol = parse_smiles(text)?;
    sanitize(&mut mol)?;
    Ok(mol)
}

/// Brings a parsed or edited molecule into the sanitized state.
///
/// Steps: kekulize aromatic input, check valences and infer hydrogens, fold
/// plain explicit hydrogen atoms, perceive rings, perceive aromaticity.
/// Already-sanitized molecules are left untouched.
pub fn sanitize(mol: &mut Molecule) -> Result<(), SanitizeError> {
    if mol.is_sanitized() {
        return Ok(());
    }
    kekulize(mol)?;
    assign_hydrogens(mol)?;
    fold_explicit_hydrogens(mol);
    let rings = find_sssr(mol);
    mol.set_rings(rings);
    perceive_aromaticity(mol);
    mol.mark_sanitized();
    Ok(())
}

fn sigma_sum(mol: &Molecule, i: usize) -> u8 {
    mol.neighbors(i).iter().map(|(_, b)| mol.bond(*b).order.valence()).sum()
}

fn needs_pi(mol: &Molecule, i: usize) -> bool {
    let atom = mol.atom(i);
    let Some(allowed) = allowed_valences(atom.element, atom.charge) else { return false };
    let sigma = sigma_sum(mol, i);
    if atom.h_fixed {
        allowed.contains(&(sigma + atom.implicit_h + 1))
    } else {
        allowed[0] > sigma
    }
}

fn kekulize(mol: &mut Molecule) -> Result<(), SanitizeError> {
    let aromatic_bonds: Vec<usize> =
        (0..mol.bond_count()).filter(|&b| mol.bond(b).order == BondOrder::Aromatic).collect();
    if aromatic_bonds.is_empty() {
        return Ok(());
    }
    let n = mol.atom_count();
    let mut on_aromatic = vec![false; n];
    for &b in &aromatic_bonds {
        on_aromatic[mol.bond(b).begin] = true;
        on_aromatic[mol.bond(b).end] = true;
    }
    let need: Vec<bool> = (0..n).map(|i| on_aromatic[i] && needs_pi(mol, i)).collect();
    // Candidate edges: aromatic bonds whose ends both need a double bond.
    let mut options: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &b in &aromatic_bonds {
        let bond = mol.bond(b);
        if need[bond.begin] && need[bond.end] {
            options[bond.begin].push((bond.end, b));
            options[bond.end].push((bond.begin, b));
        }
    }
    let mut partner: Vec<Option<usize>> = vec![None; n];
    let mut chosen: Vec<usize> = Vec::new();
    let mut budget = 200_000usize;
    if !match_all(&need, &options, &mut partner, &mut chosen, &mut budget) {
        let atom = (0..n).find(|&i| need[i] && partner[i].is_none()).unwrap_or(0);
        return Err(SanitizeError::Kekulize { atom });
    }
    for &b in &aromatic_bonds {
        mol.bond_mut(b).kekule = BondOrder::Single;
    }
    for b in chosen {
        mol.bond_mut(b).kekule = BondOrder::Double;
    }
    Ok(())
}

fn match_all(
    need: &[bool],
    options: &[Vec<(usize, usize)>],
    partner: &mut Vec<Option<usize>>,
    chosen: &mut Vec<usize>,
    budget: &mut usize,
) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    // Most constrained unmatched atom first.
    let mut best: Option<(usize, usize)> = None;
    for i in 0..need.len() {
        if !need[i] || partner[i].is_some() {
            continue;
        }
        let free = options[i].iter().filter(|(j, _)| partner[*j].is_none()).count();
        if free == 0 {
            return false;
        }
        if best.map_or(true, |(_, f)| free < f) {
            best = Some((i, free));
        }
    }
    let Some((i, _)) = best else { return true };
    for &(j, b) in &options[i] {
        if partner[j].is_some() {
            continue;
        }
        partner[i] = Some(j);
        partner[j] = Some(i);
        chosen.push(b);
        if match_all(need, options, partner, chosen, budget) {
            return true;
        }
        chosen.pop();
        partner[i] = None;
        partner[j] = None;
    }
    false
}

fn assign_hydrogens(mol: &mut Molecule) -> Result<(), SanitizeError> {
    for i in 0..mol.atom_count() {
        let atom = mol.atom(i);
        let bonds = mol.kekule_valence(i);
        let Some(allowed) = allowed_valences(atom.element, atom.charge) else {
            if !atom.h_fixed {
                mol.atom_mut(i).implicit_h = 0;
            }
            continue;
        };
        let max = *allowed.last().expect("non-empty row");
        if atom.h_fixed {
            let total = bonds + atom.implicit_h;
            if total > max {
                return Err(SanitizeError::Valence {
                    atom: i,
                    element: atom.element.symbol().to_string(),
                    valence: total,
                });
            }
        } else {
            match allowed.iter().find(|&&v| v >= bonds) {
                Some(&v) => mol.atom_mut(i).implicit_h = v - bonds,
                None => {
                    return Err(SanitizeError::Valence {
                        atom: i,
                        element: atom.element.symbol().to_string(),
                        valence: bonds,
                    })
                }
            }
        }
    }
    Ok(())
}

fn is_plain_hydrogen(mol: &Molecule, i: usize) -> bool {
    let a = mol.atom(i);
    a.element == Element::H
        && a.charge == 0
        && a.isotope.is_none()
        && a.map == 0
        && mol.degree(i) == 1
        && a.implicit_h == 0
        && {
            let (nb, b) = mol.neighbors(i)[0];
            mol.bond(b).order == BondOrder::Single && mol.atom(nb).is_heavy()
        }
}

fn fold_explicit_hydrogens(mol: &mut Molecule) {
    let hs: Vec<usize> = (0..mol.atom_count()).filter(|&i| is_plain_hydrogen(mol, i)).collect();
    if hs.is_empty() {
        return;
    }
    let mut work = mol.clone();
    // Chirality of hydrogen-bearing centres, expressed with the explicit H as `ImplicitH`.
    let mut saved: Vec<(usize, Chirality, Vec<Neighbor>)> = Vec::new();
    for i in 0..mol.atom_count() {
        let tag = mol.atom(i).chirality;
        if !tag.is_set() || hs.contains(&i) {
            continue;
        }
        let reference = mol.chiral_reference(i);
        if reference.iter().any(|n| matches!(n, Neighbor::Atom(a) if hs.contains(a))) {
            let mapped = reference
                .into_iter()
                .map(|n| match n {
                    Neighbor::Atom(a) if hs.contains(&a) => Neighbor::ImplicitH,
                    other => other,
                })
                .collect();
            saved.push((i, tag, mapped));
        }
    }
    for &h in &hs {
        let nb = mol.neighbors(h)[0].0;
        work.atom_mut(nb).implicit_h += 1;
    }
    let keep: Vec<usize> = (0..mol.atom_count()).filter(|i| !hs.contains(i)).collect();
    let (mut out, map) = work.subgraph(&keep);
    for (old, tag, reference) in saved {
        let Some(new) = map[old] else { continue };
        let old_ref: Option<Vec<Neighbor>> = reference
            .into_iter()
            .map(|n| match n {
                Neighbor::ImplicitH => Some(Neighbor::ImplicitH),
                Neighbor::Atom(a) => map[a].map(Neighbor::Atom),
            })
            .collect();
        let new_ref = out.chiral_reference(new);
        out.atom_mut(new).chirality = match old_ref.and_then(|r| permutation_parity(&r, &new_ref)) {
            Some(odd) => tag.invert_if(odd),
            None => Chirality::None,
        };
    }
    *mol = out;
}

/// Pi-electron contribution of a ring atom, `None` when it cannot be aromatic.
fn pi_electrons(mol: &Molecule, i: usize, ring_bond: &[bool]) -> Option<u8> {
    let atom = mol.atom(i);
    if !atom.element.can_be_aromatic() {
        return None;
    }
    let mut ring_double = false;
    let mut exo_double: Option<Element> = None;
    for &(nb, b) in mol.neighbors(i) {
        match mol.bond(b).kekule {
            BondOrder::Double => {
                if ring_bond[b] {
                    ring_double = true;
                } else {
                    exo_double = Some(mol.atom(nb).element);
                }
            }
            BondOrder::Triple => return None,
            _ => {}
        }
    }
    if ring_double {
        return Some(1);
    }
    if let Some(e) = exo_double {
        return if atom.element == Element::C && e != Element::C { Some(0) } else { None };
    }
    let connections = mol.degree(i) + atom.implicit_h as usize;
    let z = atom.element;
    match atom.charge {
        0 if z == Element::C => None,
        0 if z == Element::B && connections == 3 => Some(0),
        0 if [Element::N, Element::P, Element::AS].contains(&z) && connections == 3 => Some(2),
        0 if [Element::O, Element::S, Element::SE].contains(&z) && connections == 2 => Some(2),
        -1 if z == Element::C && connections == 3 => Some(2),
        -1 if z == Element::N && connections == 2 => Some(2),
        1 if z == Element::C && connections == 3 => Some(0),
        _ => None,
    }
}

fn is_huckel(total: usize) -> bool {
    total >= 2 && (total - 2) % 4 == 0
}

fn perceive_aromaticity(mol: &mut Molecule) {
    let n = mol.atom_count();
    let ring_bond: Vec<bool> = (0..mol.bond_count()).map(|b| mol.is_ring_bond(b)).collect();
    let electrons: Vec<Option<u8>> = (0..n).map(|i| pi_electrons(mol, i, &ring_bond)).collect();
    let rings = mol.rings().to_vec();
    let eligible = |r: &[usize]| r.iter().all(|&a| electrons[a].is_some());
    let count = |atoms: &[usize]| atoms.iter().map(|&a| electrons[a].unwrap_or(0) as usize).sum::<usize>();

    let mut aromatic_ring = vec![false; rings.len()];
    for (k, r) in rings.iter().enumerate() {
        aromatic_ring[k] = eligible(r) && is_huckel(count(r));
    }
    for i in 0..n {
        mol.atom_mut(i).aromatic = false;
    }
    for b in 0..mol.bond_count() {
        let k = mol.bond(b).kekule;
        mol.bond_mut(b).order = k;
    }
    for (r, _) in rings.iter().zip(&aromatic_ring).filter(|(_, &ar)| ar) {
        for k in 0..r.len() {
            let (x, y) = (r[k], r[(k + 1) % r.len()]);
            mol.atom_mut(x).aromatic = true;
            if let Some(b) = mol.bond_between(x, y) {
                mol.bond_mut(b).order = BondOrder::Aromatic;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(mol: &Molecule) -> Vec<u8> {
        mol.atoms().iter().map(|a| a.implicit_h).collect()
    }

    #[test]
    fn hydrogens_inferred() {
        assert_eq!(h(&mol_from_smiles("CCO").unwrap()), vec![3, 2, 1]);
        assert_eq!(h(&mol_from_smiles("C=O").unwrap()), vec![2, 0]);
        assert_eq!(h(&mol_from_smiles("CS(=O)(=O)C").unwrap()), vec![3, 0, 0, 0, 3]);
        assert_eq!(h(&mol_from_smiles("[NH4+]").unwrap()), vec![4]);
        assert_eq!(h(&mol_from_smiles("C[N+](C)(C)C").unwrap())[1], 0);
    }

    #[test]
    fn valence_errors() {
        assert!(matches!(
            mol_from_smiles("C(C)(C)(C)(C)C"),
            Err(ChemError::Sanitize(SanitizeError::Valence { atom: 0, .. }))
        ));
        assert!(mol_from_smiles("FC(F)(F)(F)F").is_err());
        assert!(mol_from_smiles("O=O=O").is_err());
    }

    #[test]
    fn aromatic_inputs() {
        let b = mol_from_smiles("c1ccccc1").unwrap();
        assert!(b.atoms().iter().all(|a| a.aromatic && a.implicit_h == 1));
        let doubles = b.bonds().iter().filter(|x| x.kekule == BondOrder::Double).count();
        assert_eq!(doubles, 3);
        let p = mol_from_smiles("c1cc[nH]c1").unwrap();
        assert!(p.atoms().iter().all(|a| a.aromatic));
        let py = mol_from_smiles("c1ccncc1").unwrap();
        assert_eq!(py.atom(3).implicit_h, 0);
        assert!(matches!(
            mol_from_smiles("c1cccc1"),
            Err(ChemError::Sanitize(SanitizeError::Kekulize { .. }))
        ));
        assert!(mol_from_smiles("c1ccnc1").is_err());
    }

    #[test]
    fn kekule_input_becomes_aromatic() {
        let m = mol_from_smiles("C1=CC=CC=C1").unwrap();
        assert!(m.atoms().iter().all(|a| a.aromatic));
        let f = mol_from_smiles("c1ccoc1").unwrap();
        assert!(f.atoms().iter().all(|a| a.aromatic));
        let pyridone = mol_from_smiles("O=c1cccc[nH]1").unwrap();
        assert!(pyridone.atoms()[1..].iter().all(|a| a.aromatic));
        let naph = mol_from_smiles("C1=CC=C2C=CC=CC2=C1").unwrap();
        assert!(naph.atoms().iter().all(|a| a.aromatic));
        // Rings are judged one at a time, so azulene stays localised.
        let azulene = mol_from_smiles("c1ccc2cccc2cc1").unwrap();
        assert!(azulene.atoms().iter().all(|a| !a.aromatic));
        let cyclohexene = mol_from_smiles("C1=CCCCC1").unwrap();
        assert!(cyclohexene.atoms().iter().all(|a| !a.aromatic));
        let cot = mol_from_smiles("C1=CC=CC=CC=C1").unwrap();
        assert!(cot.atoms().iter().all(|a| !a.aromatic));
    }

    #[test]
    fn explicit_hydrogens_fold() {
        let m = mol_from_smiles("[H]C([H])([H])[H]").unwrap();
        assert_eq!(m.atom_count(), 1);
        assert_eq!(m.atom(0).implicit_h, 4);
        let m = mol_from_smiles("C[H]").unwrap();
        assert_eq!(h(&m), vec![4]);
        let m = mol_from_smiles("[H][H]").unwrap();
        assert_eq!(m.atom_count(), 2);
    }

    #[test]
    fn explicit_hydrogen_keeps_stereo() {
        let a = mol_from_smiles("[C@@H](F)(Cl)Br").unwrap();
        let b = mol_from_smiles("[H][C@@](F)(Cl)Br").unwrap();
        assert!(a.atom(0).chirality.is_set());
        assert_eq!(a.atom(0).chirality, b.atom(0).chirality);
    }
}
