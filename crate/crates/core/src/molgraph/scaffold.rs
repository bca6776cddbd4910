//! Murcko scaffolds: ring systems plus the linkers joining them.

use super::mol::Molecule;
use super::sanitize::sanitize;

/// Strips side chains until only ring atoms and ring-to-ring linkers remain.
///
/// Acyclic molecules yield an empty (sanitized) molecule.
pub fn murcko_scaffold(mol: &Molecule) -> Molecule {
    let n = mol.atom_count();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|i| mol.degree(i)).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&i| degree[i] <= 1 && !mol.is_ring_atom(i)).collect();
    while let Some(i) = stack.pop() {
        if !alive[i] {
            continue;
        }
        alive[i] = false;
        for &(j, _) in mol.neighbors(i) {
            if alive[j] {
                degree[j] -= 1;
                if degree[j] <= 1 && !mol.is_ring_atom(j) {
                    stack.push(j);
                }
            }
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    let mut out = if keep.is_empty() {
        Molecule::new()
    } else {
        let mut editable = mol.to_editable();
        // Atoms with a declared hydrogen count take a hydrogen for each lost bond order.
        for &i in &keep {
            if !editable.atom(i).h_fixed {
                continue;
            }
            let lost: u8 = mol
                .neighbors(i)
                .iter()
                .filter(|(j, _)| !alive[*j])
                .map(|(_, b)| mol.bond(*b).kekule.valence())
                .sum();
            editable.atom_mut(i).implicit_h += lost;
        }
        editable.subgraph(&keep).0
    };
    match sanitize(&mut out) {
        Ok(()) => out,
        Err(e) => {
            log::warn!("scaffold failed to sanitize: {e}");
            let mut empty = Molecule::new();
            let _ = sanitize(&mut empty);
            empty
        }
    }
}
