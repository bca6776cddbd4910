//! Smallest set of smallest rings.
//!
//! Candidate cycles are built from shortest paths (one per vertex and edge)
//! and a minimum basis is picked greedily by length with GF(2) elimination
//! over bond-incidence vectors.

use std::collections::VecDeque;

use super::mol::Molecule;

#[derive(Clone)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn new(n: usize) -> BitRow {
        BitRow(vec![0; n.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn xor(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }
    fn lowest(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }
}

/// Number of independent cycles: `bonds - atoms + components`.
pub fn cyclomatic_number(mol: &Molecule) -> usize {
    (mol.bond_count() + mol.components().len()).saturating_sub(mol.atom_count())
}

/// Computes an SSSR. Each ring lists its atoms in cyclic order.
pub fn find_sssr(mol: &Molecule) -> Vec<Vec<usize>> {
    let target = cyclomatic_number(mol);
    if target == 0 {
        return Vec::new();
    }
    let n = mol.atom_count();
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let parent = bfs_parents(mol, v);
        for b in mol.bonds() {
            let (x, y) = (b.begin, b.end);
            if x == v || y == v {
                continue;
            }
            let (Some(px), Some(py)) = (path(&parent, v, x), path(&parent, v, y)) else { continue };
            if px.len() + py.len() < 3 {
                continue;
            }
            // Paths may share only their start vertex.
            if px[1..].iter().any(|a| py[1..].contains(a)) {
                continue;
            }
            let mut cycle = px;
            cycle.extend(py.into_iter().skip(1).rev());
            candidates.push(cycle);
        }
    }
    let mut keyed: Vec<(usize, Vec<usize>, Vec<usize>)> = candidates
        .into_iter()
        .map(|c| {
            let mut key = c.clone();
            key.sort_unstable();
            (c.len(), key, c)
        })
        .collect();
    keyed.sort();
    keyed.dedup_by(|a, b| a.1 == b.1 && same_edges(mol, &a.2, &b.2));

    let m = mol.bond_count();
    let mut basis: Vec<(usize, BitRow)> = Vec::new();
    let mut rings = Vec::new();
    for (_, _, cycle) in keyed {
        let mut row = edge_row(mol, &cycle, m);
        for (pivot, b) in &basis {
            if row.get(*pivot) {
                row.xor(b);
            }
        }
        if let Some(pivot) = row.lowest() {
            // Keep the basis reduced on pivots so later rows eliminate in one pass.
            for (_, b) in basis.iter_mut() {
                if b.get(pivot) {
                    b.xor(&row);
                }
            }
            basis.push((pivot, row));
            rings.push(normalise(cycle));
            if rings.len() == target {
                break;
            }
        }
    }
    rings
}

fn bfs_parents(mol: &Molecule, root: usize) -> Vec<Option<usize>> {
    let n = mol.atom_count();
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(a) = queue.pop_front() {
        let mut nbrs: Vec<usize> = mol.neighbors(a).iter().map(|(x, _)| *x).collect();
        nbrs.sort_unstable();
        for nb in nbrs {
            if !seen[nb] {
                seen[nb] = true;
                parent[nb] = Some(a);
                queue.push_back(nb);
            }
        }
    }
    parent
}

fn path(parent: &[Option<usize>], root: usize, to: usize) -> Option<Vec<usize>> {
    let mut out = vec![to];
    let mut cur = to;
    while cur != root {
        cur = parent[cur]?;
        out.push(cur);
    }
    out.reverse();
    Some(out)
}

fn edge_row(mol: &Molecule, cycle: &[usize], m: usize) -> BitRow {
    let mut row = BitRow::new(m);
    for i in 0..cycle.len() {
        let a = cycle[i];
        let b = cycle[(i + 1) % cycle.len()];
        if let Some(bi) = mol.bond_between(a, b) {
            row.set(bi);
        }
    }
    row
}

fn same_edges(mol: &Molecule, a: &[usize], b: &[usize]) -> bool {
    let m = mol.bond_count();
    edge_row(mol, a, m).0 == edge_row(mol, b, m).0
}

/// Rotates a cycle to start at its lowest atom, walking towards the smaller neighbour.
fn normalise(mut cycle: Vec<usize>) -> Vec<usize> {
    let n = cycle.len();
    let start = (0..n).min_by_key(|&i| cycle[i]).unwrap_or(0);
    cycle.rotate_left(start);
    if n > 2 && cycle[n - 1] < cycle[1] {
        cycle[1..].reverse();
    }
    cycle
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::smiles::parse_smiles;

    fn ring_sizes(smiles: &str) -> Vec<usize> {
        let m = parse_smiles(smiles).unwrap();
        let mut s: Vec<usize> = find_sssr(&m).iter().map(|r| r.len()).collect();
        s.sort_unstable();
        s
    }

    #[test]
    fn simple_systems() {
        assert_eq!(ring_sizes("CCO"), Vec::<usize>::new());
        assert_eq!(ring_sizes("C1CC1"), vec![3]);
        assert_eq!(ring_sizes("C1CCC1"), vec![4]);
        assert_eq!(ring_sizes("c1ccc2ccccc2c1"), vec![6, 6]);
        assert_eq!(ring_sizes("C1CC2(C1)CCCC2"), vec![4, 5]);
        assert_eq!(ring_sizes("C12C3C4C1C5C2C3C45"), vec![4, 4, 4, 4, 4]);
        assert_eq!(ring_sizes("C1CC2CCC1C2"), vec![5, 5]);
    }

    #[test]
    fn rings_are_cyclic_paths() {
        let m = parse_smiles("c1ccc2c(c1)cc1ccccc12").unwrap();
        for r in find_sssr(&m) {
            for i in 0..r.len() {
                assert!(m.bond_between(r[i], r[(i + 1) % r.len()]).is_some());
            }
        }
    }
}
