//! MCE-18: cumulative sp3 complexity.

use serde::{Deserialize, Serialize};

use crate::molgraph::descriptors::{chiral_centers, is_sp3, ring_counts, spiro_atoms};
use crate::molgraph::{Element, Molecule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mce18Terms {
    pub ar: f64,
    pub nar: f64,
    pub chiral: f64,
    pub spiro: f64,
    pub sp3: f64,
    pub cyc: f64,
    pub acyc: f64,
    pub q1: f64,
}

impl Mce18Terms {
    pub fn score(&self) -> f64 {
        (self.ar + self.nar + self.chiral + self.spiro + (self.sp3 + self.cyc - self.acyc) / (1.0 + self.sp3)) * self.q1
    }
}

/// Quadratic index over the heavy-atom degree sequence: `3 - 2N + sum(d^2)/2`, floored at 0.
pub fn quadratic_index(mol: &Molecule) -> f64 {
    let heavy: Vec<usize> = (0..mol.atom_count()).filter(|&i| mol.atom(i).is_heavy()).collect();
    let m: usize = heavy.iter().map(|&i| mol.heavy_degree(i).pow(2)).sum();
    (3.0 - 2.0 * heavy.len() as f64 + m as f64 / 2.0).max(0.0)
}

pub fn mce18_terms(mol: &Molecule) -> Mce18Terms {
    let (aromatic, aliphatic) = ring_counts(mol);
    let carbons: Vec<usize> = (0..mol.atom_count()).filter(|&i| mol.atom(i).element == Element::C).collect();
    let sp3: Vec<usize> = carbons.iter().copied().filter(|&i| is_sp3(mol, i)).collect();
    let nc = carbons.len().max(1) as f64;
    let in_ring = sp3.iter().filter(|&&i| mol.is_ring_atom(i)).count() as f64;
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    Mce18Terms {
        ar: flag(aromatic > 0),
        nar: flag(aliphatic > 0),
        chiral: flag(!chiral_centers(mol).is_empty()),
        spiro: flag(!spiro_atoms(mol).is_empty()),
        sp3: sp3.len() as f64 / nc,
        cyc: in_ring / nc,
        acyc: (sp3.len() as f64 - in_ring) / nc,
        q1: quadratic_index(mol),
    }
}

pub fn mce18(mol: &Molecule) -> f64 {
    mce18_terms(mol).score().max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::mol_from_smiles;

    #[test]
    fn benzene_is_q1() {
        // Six atoms of degree 2: 3 - 12 + 24/2 = 3; only the aromatic flag is set.
        let m = mol_from_smiles("c1ccccc1").unwrap();
        assert_eq!(quadratic_index(&m), 3.0);
        assert_eq!(mce18(&m), 3.0);
    }

    #[test]
    fn methane_is_zero() {
        // sp3 = 1, Cyc = 0, Acyc = 1: (1 + 0 - 1) / 2 = 0; Q1 = 3 - 2 = 1.
        let m = mol_from_smiles("C").unwrap();
        assert_eq!(quadratic_index(&m), 1.0);
        assert_eq!(mce18(&m), 0.0);
    }

    #[test]
    fn cyclohexane_by_hand() {
        // NAR = 1; sp3 = Cyc = 1, Acyc = 0: 1 + 2/2 = 2; Q1 = 3.
        assert_eq!(mce18(&mol_from_smiles("C1CCCCC1").unwrap()), 6.0);
    }
}
