//! Physicochemical descriptors.

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use super::canon::symmetry_classes;
use super::element::Element;
use super::error::ChemError;
use super::mol::{BondOrder, Molecule};
use super::smarts::{Pattern, Target};
use crate::data;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DescriptorVector {
    pub mw: f64,
    pub heavy_atoms: usize,
    pub hbd: usize,
    pub hba: usize,
    pub rotatable_bonds: usize,
    pub aromatic_rings: usize,
    pub aliphatic_rings: usize,
    pub fraction_sp3: f64,
    pub chiral_centers: usize,
    pub spiro_atoms: usize,
    pub heteroatoms: usize,
    pub carbons: usize,
    pub logp_est: f64,
    pub tpsa_est: f64,
}

impl DescriptorVector {
    pub const NAMES: [&'static str; 14] = [
        "mw",
        "heavy_atoms",
        "hbd",
        "hba",
        "rotatable_bonds",
        "aromatic_rings",
        "aliphatic_rings",
        "fraction_sp3",
        "chiral_centers",
        "spiro_atoms",
        "heteroatoms",
        "carbons",
        "logp_est",
        "tpsa_est",
    ];

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "mw" => self.mw,
            "heavy_atoms" => self.heavy_atoms as f64,
            "hbd" => self.hbd as f64,
            "hba" => self.hba as f64,
            "rotatable_bonds" => self.rotatable_bonds as f64,
            "aromatic_rings" => self.aromatic_rings as f64,
            "aliphatic_rings" => self.aliphatic_rings as f64,
            "rings" => (self.aromatic_rings + self.aliphatic_rings) as f64,
            "fraction_sp3" => self.fraction_sp3,
            "chiral_centers" => self.chiral_centers as f64,
            "spiro_atoms" => self.spiro_atoms as f64,
            "heteroatoms" => self.heteroatoms as f64,
            "carbons" => self.carbons as f64,
            "logp_est" => self.logp_est,
            "tpsa_est" => self.tpsa_est,
            _ => return None,
        })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        Self::NAMES.iter().map(|n| self.get(n).expect("listed name")).collect()
    }
}

/// Computes every descriptor of a sanitized molecule.
pub fn descriptors(mol: &Molecule) -> Result<DescriptorVector, ChemError> {
    if !mol.is_sanitized() {
        return Err(ChemError::NotSanitized);
    }
    let heavy: Vec<usize> = (0..mol.atom_count()).filter(|&i| mol.atom(i).is_heavy()).collect();
    let carbons = heavy.iter().filter(|&&i| mol.atom(i).element == Element::C).count();
    let (aromatic_rings, aliphatic_rings) = ring_counts(mol);
    let sp3 = heavy.iter().filter(|&&i| mol.atom(i).element == Element::C && is_sp3(mol, i)).count();
    Ok(DescriptorVector {
        mw: molecular_weight(mol),
        heavy_atoms: heavy.len(),
        hbd: heavy.iter().filter(|&&i| is_n_or_o(mol, i) && mol.atom(i).implicit_h > 0).count(),
        hba: heavy.iter().filter(|&&i| is_n_or_o(mol, i)).count(),
        rotatable_bonds: rotatable_bonds(mol),
        aromatic_rings,
        aliphatic_rings,
        fraction_sp3: if carbons == 0 { 0.0 } else { sp3 as f64 / carbons as f64 },
        chiral_centers: chiral_centers(mol).len(),
        spiro_atoms: spiro_atoms(mol).len(),
        heteroatoms: heavy.len() - carbons,
        carbons,
        logp_est: logp_estimate(mol),
        tpsa_est: tpsa_estimate(mol),
    })
}

fn is_n_or_o(mol: &Molecule, i: usize) -> bool {
    matches!(mol.atom(i).element, Element::N | Element::O)
}

pub fn molecular_weight(mol: &Molecule) -> f64 {
    let parts = mol
        .atoms()
        .iter()
        .map(|a| {
            let own = match a.isotope {
                Some(m) if !a.element.is_dummy() => m as f64,
                _ => a.element.mass(),
            };
            own + a.implicit_h as f64 * Element::H.mass()
        })
        .collect();
    ordered_sum(parts)
}

/// Sum in sorted order, so the result does not depend on atom order.
fn ordered_sum(mut parts: Vec<f64>) -> f64 {
    parts.sort_by(f64::total_cmp);
    parts.into_iter().fold(0.0, |a, b| a + b)
}

/// Carbon-style sp3 test: every bond is a localised single bond.
pub fn is_sp3(mol: &Molecule, i: usize) -> bool {
    mol.neighbors(i).iter().all(|(_, b)| mol.bond(*b).order == BondOrder::Single)
}

/// `(aromatic, aliphatic)` SSSR ring counts; a ring is aromatic when all its bonds are.
pub fn ring_counts(mol: &Molecule) -> (usize, usize) {
    let mut aromatic = 0;
    for r in mol.rings() {
        let all = (0..r.len()).all(|k| {
            mol.bond_between(r[k], r[(k + 1) % r.len()])
                .is_some_and(|b| mol.bond(b).order == BondOrder::Aromatic)
        });
        if all {
            aromatic += 1;
        }
    }
    (aromatic, mol.rings().len() - aromatic)
}

fn is_amide_cn(mol: &Molecule, a: usize, b: usize) -> bool {
    let carbonyl = |c: usize| {
        mol.atom(c).element == Element::C
            && mol.neighbors(c).iter().any(|&(o, bo)| {
                mol.atom(o).element == Element::O && mol.bond(bo).kekule == BondOrder::Double
            })
    };
    let (ea, eb) = (mol.atom(a).element, mol.atom(b).element);
    (ea == Element::N && carbonyl(b)) || (eb == Element::N && carbonyl(a))
}

/// Non-ring single bonds between heavy atoms of heavy degree ≥ 2, excluding amide C–N.
pub fn rotatable_bonds(mol: &Molecule) -> usize {
    (0..mol.bond_count())
        .filter(|&b| {
            let bond = mol.bond(b);
            let (x, y) = (bond.begin, bond.end);
            bond.order == BondOrder::Single
                && !mol.is_ring_bond(b)
                && mol.atom(x).is_heavy()
                && mol.atom(y).is_heavy()
                && mol.heavy_degree(x) >= 2
                && mol.heavy_degree(y) >= 2
                && !is_amide_cn(mol, x, y)
        })
        .count()
}

/// Atoms with a tetrahedral tag, plus untagged sp3 carbons (and quaternary
/// N+) whose four substituents fall in four distinct symmetry classes.
pub fn chiral_centers(mol: &Molecule) -> Vec<usize> {
    let classes = symmetry_classes(mol);
    (0..mol.atom_count())
        .filter(|&i| {
            let a = mol.atom(i);
            if a.chirality.is_set() {
                return true;
            }
            let candidate = (a.element == Element::C && a.charge == 0)
                || (a.element == Element::N && a.charge == 1);
            if !candidate || !is_sp3(mol, i) || a.implicit_h > 1 || mol.degree(i) + a.implicit_h as usize != 4 {
                return false;
            }
            let mut seen: Vec<usize> = mol.neighbors(i).iter().map(|(n, _)| classes[*n]).collect();
            seen.sort_unstable();
            seen.windows(2).all(|w| w[0] != w[1])
        })
        .collect()
}

/// Atoms shared by two SSSR rings that have no other atom in common.
pub fn spiro_atoms(mol: &Molecule) -> Vec<usize> {
    let rings = mol.rings();
    let mut out = Vec::new();
    for i in 0..mol.atom_count() {
        let containing: Vec<&Vec<usize>> = rings.iter().filter(|r| r.contains(&i)).collect();
        let spiro = containing.iter().enumerate().any(|(k, a)| {
            containing[k + 1..].iter().any(|b| a.iter().filter(|x| b.contains(x)).count() == 1)
        });
        if spiro {
            out.push(i);
        }
    }
    out
}

struct LogpRule {
    hydrogen: bool,
    pattern: Pattern,
    value: f64,
}

static LOGP_RULES: Lazy<Vec<LogpRule>> = Lazy::new(|| {
    let text = data::table(data::LOGP);
    let mut out = Vec::new();
    for (line_no, line) in data::lines(&text) {
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let parsed = (|| {
            let [ty, pat, val] = fields[..] else { return None };
            let pattern = match Pattern::parse(pat) {
                Ok(p) => p,
                Err(e) => {
                    log::warn!("logP table line {line_no}: {e}");
                    return None;
                }
            };
            Some(LogpRule { hydrogen: ty.starts_with('H'), pattern, value: val.parse().ok()? })
        })();
        match parsed {
            Some(r) => out.push(r),
            None => log::warn!("logP table line {line_no} ignored"),
        }
    }
    out
});

/// Atom-contribution logP estimate.
pub fn logp_estimate(mol: &Molecule) -> f64 {
    let target = Target::new(mol);
    let mut parts = Vec::new();
    for i in 0..mol.atom_count() {
        let atom = mol.atom(i);
        if !atom.is_heavy() {
            continue;
        }
        if let Some(r) = LOGP_RULES.iter().find(|r| !r.hydrogen && r.pattern.matches_at(&target, i)) {
            parts.push(r.value);
        }
        if atom.implicit_h > 0 {
            if let Some(r) = LOGP_RULES.iter().find(|r| r.hydrogen && r.pattern.matches_at(&target, i)) {
                parts.push(r.value * atom.implicit_h as f64);
            }
        }
    }
    ordered_sum(parts)
}

#[derive(Debug, Clone, Copy)]
struct TpsaRow {
    element: Element,
    key: [i32; 7],
    ring3: Option<bool>,
    value: f64,
}

static TPSA_ROWS: Lazy<Vec<TpsaRow>> = Lazy::new(|| {
    let text = data::table(data::TPSA);
    let mut out = Vec::new();
    for (line_no, line) in data::lines(&text) {
        let f: Vec<&str> = line.split_whitespace().collect();
        let parsed = (|| {
            if f.len() != 10 {
                return None;
            }
            let element = Element::from_symbol(f[0])?;
            let mut key = [0i32; 7];
            for k in 0..7 {
                key[k] = f[1 + k].parse().ok()?;
            }
            let ring3 = match f[8] {
                "*" => None,
                "0" => Some(false),
                "1" => Some(true),
                _ => return None,
            };
            Some(TpsaRow { element, key, ring3, value: f[9].parse().ok()? })
        })();
        match parsed {
            Some(r) => out.push(r),
            None => log::warn!("TPSA table line {line_no} ignored"),
        }
    }
    out
});

/// Fragment-contribution polar surface area estimate over N and O atoms.
pub fn tpsa_estimate(mol: &Molecule) -> f64 {
    let mut parts = Vec::new();
    for i in 0..mol.atom_count() {
        let atom = mol.atom(i);
        if !matches!(atom.element, Element::N | Element::O) {
            continue;
        }
        let mut counts = [0i32; 4];
        for &(nb, b) in mol.neighbors(i) {
            if !mol.atom(nb).is_heavy() {
                continue;
            }
            let k = match mol.bond(b).order {
                BondOrder::Single => 0,
                BondOrder::Double => 1,
                BondOrder::Triple => 2,
                BondOrder::Aromatic => 3,
            };
            counts[k] += 1;
        }
        let key = [
            atom.aromatic as i32,
            atom.charge as i32,
            atom.implicit_h as i32,
            counts[0],
            counts[1],
            counts[2],
            counts[3],
        ];
        let in3 = mol.rings().iter().any(|r| r.len() == 3 && r.contains(&i));
        let row = TPSA_ROWS
            .iter()
            .find(|r| r.element == atom.element && r.key == key && r.ring3.map_or(true, |x| x == in3));
        parts.push(match row {
            Some(r) => r.value,
            None => {
                let nbrs = mol.heavy_degree(i) as f64;
                let h = atom.implicit_h as f64;
                let v = if atom.element == Element::N { 30.5 - 8.2 * nbrs + 1.5 * h } else { 28.5 - 8.6 * nbrs + 1.5 * h };
                v.max(0.0)
            }
        });
    }
    ordered_sum(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::sanitize::mol_from_smiles;

    fn d(s: &str) -> DescriptorVector {
        descriptors(&mol_from_smiles(s).unwrap()).unwrap()
    }

    #[test]
    fn methane_and_benzene() {
        let m = d("C");
        assert!((m.mw - 16.04).abs() < 0.01);
        assert_eq!((m.hbd, m.hba, m.rotatable_bonds), (0, 0, 0));
        assert_eq!(m.fraction_sp3, 1.0);
        let b = d("c1ccccc1");
        assert_eq!(b.aromatic_rings, 1);
        assert_eq!(b.fraction_sp3, 0.0);
        assert_eq!(b.rotatable_bonds, 0);
    }

    #[test]
    fn counts() {
        let x = d("CC(=O)NCCO");
        assert_eq!(x.hbd, 2);
        assert_eq!(x.hba, 3);
        // N-C and C-C are rotatable; the amide C-N and terminal bonds are not.
        assert_eq!(x.rotatable_bonds, 2);
        assert_eq!(x.heavy_atoms, x.carbons + x.heteroatoms);
        assert_eq!(d("C1CCC2(CC1)CCC2").spiro_atoms, 1);
        assert_eq!(d("CC(N)C(=O)O").chiral_centers, 1);
        assert_eq!(d("CC(C)C(=O)O").chiral_centers, 0);
        assert_eq!(d("C1CCCCC1c1ccccc1").aliphatic_rings, 1);
    }

    #[test]
    fn estimates_are_plausible() {
        assert!((d("CCO").tpsa_est - 20.23).abs() < 1e-9);
        assert!((d("c1ccncc1").tpsa_est - 12.89).abs() < 1e-9);
        assert!(d("CCCCCC").logp_est > d("OCC(O)CO").logp_est);
    }

    #[test]
    fn alkane_step() {
        let a = d("CCCCC").mw;
        let b = d("CCCC").mw;
        assert!((a - b - 14.03).abs() < 0.01);
    }
}
