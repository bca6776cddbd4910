use super::element::Element;
use super::error::GraphError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Bond-order contribution to valence; aromatic bonds count as one sigma bond.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub fn from_valence(v: u8) -> Option<BondOrder> {
        match v {
            1 => Some(BondOrder::Single),
            2 => Some(BondOrder::Double),
            3 => Some(BondOrder::Triple),
            _ => None,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

/// Tetrahedral tag. `Ccw` is SMILES `@`, `Cw` is `@@`.
///
/// Stored relative to the atom's reference neighbour order: an implicit
/// hydrogen first (when present), then neighbours by ascending atom index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
pub enum Chirality {
    #[default]
    None,
    Ccw,
    Cw,
}

impl Chirality {
    pub fn inverted(self) -> Chirality {
        match self {
            Chirality::None => Chirality::None,
            Chirality::Ccw => Chirality::Cw,
            Chirality::Cw => Chirality::Ccw,
        }
    }

    pub fn invert_if(self, odd: bool) -> Chirality {
        if odd {
            self.inverted()
        } else {
            self
        }
    }

    pub fn is_set(self) -> bool {
        self != Chirality::None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Atom {
    pub element: Element,
    pub charge: i8,
    pub isotope: Option<u16>,
    pub aromatic: bool,
    /// Hydrogens attached to this atom (implicit plus bracket-declared).
    pub implicit_h: u8,
    pub chirality: Chirality,
    /// Bracket atoms declare their hydrogen count; others have it inferred.
    pub h_fixed: bool,
    /// Atom-map class, `0` when absent.
    pub map: u16,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            charge: 0,
            isotope: None,
            aromatic: false,
            implicit_h: 0,
            chirality: Chirality::None,
            h_fixed: element.is_dummy(),
            map: 0,
        }
    }

    pub fn is_heavy(&self) -> bool {
        !self.element.is_hydrogen() && !self.element.is_dummy()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Bond {
    pub begin: usize,
    pub end: usize,
    pub order: BondOrder,
    /// Localised order; equals `order` for non-aromatic bonds.
    pub kekule: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.begin == atom {
            self.end
        } else {
            self.begin
        }
    }

    pub fn touches(&self, atom: usize) -> bool {
        self.begin == atom || self.end == atom
    }
}

/// A neighbour slot used when reasoning about tetrahedral parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    ImplicitH,
    Atom(usize),
}

/// Attributed molecular graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    rings: Vec<Vec<usize>>,
    sanitized: bool,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Molecule {
    pub fn new() -> Molecule {
        Molecule::default()
    }

    pub fn add_atom(&mut self, atom: Atom) -> usize {
        self.atoms.push(atom);
        self.adjacency.push(Vec::new());
        self.sanitized = false;
        self.atoms.len() - 1
    }

    pub fn add_bond(&mut self, a: usize, b: usize, order: BondOrder) -> Result<usize, GraphError> {
        if a == b {
            return Err(GraphError::SelfBond(a));
        }
        let n = self.atoms.len();
        if a >= n || b >= n {
            return Err(GraphError::AtomOutOfRange(a.max(b)));
        }
        if self.bond_between(a, b).is_some() {
            return Err(GraphError::DuplicateBond(a, b));
        }
        let idx = self.bonds.len();
        let kekule = if order == BondOrder::Aromatic { BondOrder::Single } else { order };
        self.bonds.push(Bond { begin: a, end: b, order, kekule });
        self.adjacency[a].push((b, idx));
        self.adjacency[b].push((a, idx));
        self.sanitized = false;
        Ok(idx)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn atom_mut(&mut self, i: usize) -> &mut Atom {
        self.sanitized = false;
        &mut self.atoms[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub fn bond_mut(&mut self, i: usize) -> &mut Bond {
        self.sanitized = false;
        &mut self.bonds[i]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn rings(&self) -> &[Vec<usize>] {
        &self.rings
    }

    pub fn is_sanitized(&self) -> bool {
        self.sanitized
    }

    pub(crate) fn set_rings(&mut self, rings: Vec<Vec<usize>>) {
        self.rings = rings;
    }

    pub(crate) fn mark_sanitized(&mut self) {
        self.sanitized = true;
    }

    /// `(neighbour, bond index)` pairs in bond-creation order.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Number of neighbours that are neither hydrogen nor attachment points.
    pub fn heavy_degree(&self, i: usize) -> usize {
        self.adjacency[i].iter().filter(|(n, _)| self.atoms[*n].is_heavy()).count()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency.get(a)?.iter().find(|(n, _)| *n == b).map(|(_, bi)| *bi)
    }

    /// Sum of localised bond orders around an atom.
    pub fn kekule_valence(&self, i: usize) -> u8 {
        self.adjacency[i].iter().map(|(_, b)| self.bonds[*b].kekule.valence()).sum()
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.is_heavy()).count()
    }

    pub fn is_ring_atom(&self, i: usize) -> bool {
        self.rings.iter().any(|r| r.contains(&i))
    }

    pub fn ring_count_of_atom(&self, i: usize) -> usize {
        self.rings.iter().filter(|r| r.contains(&i)).count()
    }

    pub fn is_ring_bond(&self, b: usize) -> bool {
        let bond = &self.bonds[b];
        self.rings.iter().any(|r| ring_has_edge(r, bond.begin, bond.end))
    }

    /// Connected components as sorted atom lists, ordered by their lowest atom.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut i = 0;
            while i < comp.len() {
                let a = comp[i];
                for &(nb, _) in &self.adjacency[a] {
                    if !seen[nb] {
                        seen[nb] = true;
                        comp.push(nb);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_multi_fragment(&self) -> bool {
        self.components().len() > 1
    }

    /// Reference neighbour order for tetrahedral parity.
    pub fn chiral_reference(&self, i: usize) -> Vec<Neighbor> {
        let mut out = Vec::with_capacity(4);
        if self.atoms[i].implicit_h > 0 {
            out.push(Neighbor::ImplicitH);
        }
        let mut nbrs: Vec<usize> = self.adjacency[i].iter().map(|(n, _)| *n).collect();
        nbrs.sort_unstable();
        out.extend(nbrs.into_iter().map(Neighbor::Atom));
        out
    }

    /// Returns a copy whose atom `i` is moved to index `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Molecule {
        assert_eq!(perm.len(), self.atoms.len());
        let mut inverse = vec![usize::MAX; perm.len()];
        for (old, &new) in perm.iter().enumerate() {
            inverse[new] = old;
        }
        let mut out = Molecule::new();
        for &old in &inverse {
            out.add_atom(self.atoms[old].clone());
        }
        for b in &self.bonds {
            let idx = out
                .add_bond(perm[b.begin], perm[b.end], b.order)
                .expect("permutation preserves a valid bond set");
            out.bonds[idx].kekule = b.kekule;
        }
        out.fix_chirality_from(self, |old| Some(perm[old]));
        out.rings = self
            .rings
            .iter()
            .map(|r| r.iter().map(|&a| perm[a]).collect())
            .collect();
        out.sanitized = self.sanitized;
        out
    }

    /// Re-expresses chirality tags copied from `source` after an atom remapping.
    ///
    /// Tags whose neighbourhood no longer corresponds are cleared.
    pub(crate) fn fix_chirality_from(&mut self, source: &Molecule, map: impl Fn(usize) -> Option<usize>) {
        let mut inverse = vec![None; self.atoms.len()];
        for old in 0..source.atoms.len() {
            if let Some(new) = map(old) {
                if new < inverse.len() {
                    inverse[new] = Some(old);
                }
            }
        }
        for new in 0..self.atoms.len() {
            let Some(old) = inverse[new] else { continue };
            let tag = source.atoms[old].chirality;
            if !tag.is_set() {
                continue;
            }
            let old_ref: Vec<Neighbor> = source
                .chiral_reference(old)
                .into_iter()
                .map(|n| match n {
                    Neighbor::ImplicitH => Some(Neighbor::ImplicitH),
                    Neighbor::Atom(a) => map(a).map(Neighbor::Atom),
                })
                .collect::<Option<Vec<_>>>()
                .unwrap_or_default();
            let new_ref = self.chiral_reference(new);
            self.atoms[new].chirality = match permutation_parity(&old_ref, &new_ref) {
                Some(odd) => tag.invert_if(odd),
                None => Chirality::None,
            };
        }
    }

    /// Carries the tag of `source` atom `old` onto atom `new`, translating the
    /// source reference order through `translate`.
    fn carry_tag(&mut self, source: &Molecule, old: usize, new: usize, translate: impl Fn(Neighbor) -> Option<Neighbor>) {
        let tag = source.atoms[old].chirality;
        if !tag.is_set() {
            return;
        }
        let old_ref: Option<Vec<Neighbor>> = source.chiral_reference(old).into_iter().map(&translate).collect();
        let new_ref = self.chiral_reference(new);
        self.atoms[new].chirality = match old_ref.and_then(|r| permutation_parity(&r, &new_ref)) {
            Some(odd) => tag.invert_if(odd),
            None => Chirality::None,
        };
    }

    /// Breaks each bond `(x, y)` in `cuts` and caps both ends with a new
    /// dummy atom carrying the given isotope label.
    ///
    /// Dummies are appended in cut order: cut `k` adds `(x side, y side)` at
    /// `n + 2k` and `n + 2k + 1`.
    pub(crate) fn split_bonds(&self, cuts: &[(usize, usize, u16, u16)]) -> Result<Molecule, GraphError> {
        let n = self.atoms.len();
        let mut out = self.clone();
        let mut doomed: Vec<usize> = Vec::with_capacity(cuts.len());
        for &(x, y, _, _) in cuts {
            doomed.push(self.bond_between(x, y).ok_or(GraphError::AtomOutOfRange(x.max(y)))?);
        }
        doomed.sort_unstable_by(|a, b| b.cmp(a));
        doomed.dedup();
        for b in doomed {
            out.bonds.remove(b);
        }
        out.rebuild_adjacency();
        for &(x, y, lx, ly) in cuts {
            let order = self.bonds[self.bond_between(x, y).expect("checked above")].order;
            for (end, label) in [(x, lx), (y, ly)] {
                let mut dummy = Atom::new(Element::DUMMY);
                dummy.isotope = Some(label);
                let d = out.add_atom(dummy);
                out.add_bond(end, d, order)?;
            }
        }
        let mut partner = std::collections::HashMap::new();
        for (k, &(x, y, _, _)) in cuts.iter().enumerate() {
            partner.insert((x, y), n + 2 * k);
            partner.insert((y, x), n + 2 * k + 1);
        }
        for i in 0..n {
            out.carry_tag(self, i, i, |nb| match nb {
                Neighbor::Atom(j) => Some(Neighbor::Atom(*partner.get(&(i, j)).unwrap_or(&j))),
                h => Some(h),
            });
        }
        out.rings.clear();
        out.sanitized = false;
        Ok(out)
    }

    /// Joins the single neighbours of dummy atoms `d1` and `d2` with the
    /// bond order `d1` carried, then deletes both dummies.
    ///
    /// Returns the new molecule and the old-to-new index map.
    pub(crate) fn fuse_dummies(&self, d1: usize, d2: usize) -> Result<(Molecule, Vec<Option<usize>>), GraphError> {
        let (&(x, b1), &(y, _)) = match (self.adjacency[d1].as_slice(), self.adjacency[d2].as_slice()) {
            ([a], [b]) => (a, b),
            _ => return Err(GraphError::AtomOutOfRange(d1.max(d2))),
        };
        if x == y {
            return Err(GraphError::SelfBond(x));
        }
        if self.bond_between(x, y).is_some() {
            return Err(GraphError::DuplicateBond(x, y));
        }
        let keep: Vec<usize> = (0..self.atoms.len()).filter(|&i| i != d1 && i != d2).collect();
        let (mut out, map) = self.subgraph(&keep);
        let (nx, ny) = (map[x].expect("kept"), map[y].expect("kept"));
        let idx = out.add_bond(nx, ny, self.bonds[b1].order)?;
        out.bonds[idx].kekule = self.bonds[b1].kekule;
        for (c, dummy, other) in [(x, d1, ny), (y, d2, nx)] {
            out.carry_tag(self, c, map[c].expect("kept"), |nb| match nb {
                Neighbor::Atom(j) if j == dummy => Some(Neighbor::Atom(other)),
                Neighbor::Atom(j) => map[j].map(Neighbor::Atom),
                h => Some(h),
            });
        }
        Ok((out, map))
    }

    fn rebuild_adjacency(&mut self) {
        self.adjacency = vec![Vec::new(); self.atoms.len()];
        for (i, b) in self.bonds.iter().enumerate() {
            self.adjacency[b.begin].push((b.end, i));
            self.adjacency[b.end].push((b.begin, i));
        }
    }

    /// A copy with localised bonds, no aromatic flags and hydrogens marked
    /// for re-inference, ready for graph edits followed by `sanitize`.
    pub fn to_editable(&self) -> Molecule {
        let mut out = self.clone();
        for b in &mut out.bonds {
            b.order = b.kekule;
        }
        for a in &mut out.atoms {
            a.aromatic = false;
            if a.charge == 0 && a.isotope.is_none() && a.element.is_organic_subset() {
                a.h_fixed = false;
            }
        }
        out.rings.clear();
        out.sanitized = false;
        out
    }

    /// Copies the atoms in `keep` (in the given order) and the bonds among them.
    ///
    /// Returns the new molecule and the old-to-new index map.
    pub fn subgraph(&self, keep: &[usize]) -> (Molecule, Vec<Option<usize>>) {
        let mut map = vec![None; self.atoms.len()];
        let mut out = Molecule::new();
        for &a in keep {
            map[a] = Some(out.add_atom(self.atoms[a].clone()));
        }
        for b in &self.bonds {
            if let (Some(x), Some(y)) = (map[b.begin], map[b.end]) {
                let idx = out.add_bond(x, y, b.order).expect("subgraph bonds are unique");
                out.bonds[idx].kekule = b.kekule;
            }
        }
        out.fix_chirality_from(self, |old| map[old]);
        (out, map)
    }

    /// Removes atoms, compacting indices. Bonds touching removed atoms are dropped.
    pub fn remove_atoms(&self, remove: &[usize]) -> Molecule {
        let keep: Vec<usize> = (0..self.atoms.len()).filter(|i| !remove.contains(i)).collect();
        self.subgraph(&keep).0
    }

    pub fn remove_bond(&mut self, b: usize) {
        self.bonds.remove(b);
        self.rebuild_adjacency();
        self.sanitized = false;
    }
}

pub(crate) fn ring_has_edge(ring: &[usize], a: usize, b: usize) -> bool {
    let n = ring.len();
    (0..n).any(|i| {
        let x = ring[i];
        let y = ring[(i + 1) % n];
        (x == a && y == b) || (x == b && y == a)
    })
}

/// Parity of the permutation taking `from` to `to`; `None` when they are not
/// permutations of each other.
pub fn permutation_parity(from: &[Neighbor], to: &[Neighbor]) -> Option<bool> {
    if from.len() != to.len() {
        return None;
    }
    let mut positions = Vec::with_capacity(from.len());
    for item in from {
        positions.push(to.iter().position(|t| t == item)?);
    }
    let mut seen = vec![false; positions.len()];
    let mut odd = false;
    for start in 0..positions.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = positions[j];
            len += 1;
        }
        if len % 2 == 0 {
            odd = !odd;
        }
    }
    Some(odd)
}
