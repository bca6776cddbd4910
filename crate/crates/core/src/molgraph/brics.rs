//! Retrosynthetic fragmentation with typed attachment points, and the
//! reverse operation of joining fragments at compatible attachments.

use std::collections::BTreeSet;

use once_cell::sync::Lazy;
use rand::Rng;

use super::canon::{canonical_ranks, canonical_smiles};
use super::error::{ChemError, RuleError};
use super::mol::Molecule;
use super::sanitize::{mol_from_smiles, sanitize};
use super::smarts::{Pattern, Target};
use crate::data;

/// Pieces smaller than this (in heavy atoms) are never produced by a cut.
pub const MIN_FRAGMENT_HEAVY_ATOMS: usize = 2;

/// Default heavy-atom cap for recombination.
pub const DEFAULT_MAX_HEAVY_ATOMS: usize = 50;

#[derive(Debug, Clone)]
pub struct BricsRule {
    pub id: String,
    pub label_a: u16,
    pub label_b: u16,
    pub pattern: Pattern,
    pub description: String,
    atom_a: usize,
    atom_b: usize,
}

/// A cleavage rule table plus the attachment compatibility it implies.
#[derive(Debug, Clone)]
pub struct BricsRules {
    rules: Vec<BricsRule>,
    compatible: BTreeSet<(u16, u16)>,
}

static DEFAULT_RULES: Lazy<BricsRules> = Lazy::new(|| {
    BricsRules::parse(&data::table(data::BRICS)).expect("shipped cleavage table must compile")
});

impl BricsRules {
    pub fn parse(text: &str) -> Result<BricsRules, RuleError> {
        let mut rules = Vec::new();
        let mut compatible = BTreeSet::new();
        for (line_no, line) in data::lines(text) {
            let err = |m: String| RuleError::new(data::BRICS, line_no, m);
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 4 {
                return Err(err(format!("expected at least 4 tab-separated fields, found {}", fields.len())));
            }
            let label = |s: &str| s.trim().parse::<u16>().map_err(|_| err(format!("bad label {s:?}")));
            let (label_a, label_b) = (label(fields[1])?, label(fields[2])?);
            let pattern = Pattern::parse(fields[3].trim()).map_err(|e| err(e.to_string()))?;
            let (Some(atom_a), Some(atom_b)) = (pattern.mapped_atom(1), pattern.mapped_atom(2)) else {
                return Err(err("pattern needs atoms mapped :1 and :2".into()));
            };
            let id = fields[0].trim().to_string();
            if rules.iter().any(|r: &BricsRule| r.id == id) {
                return Err(err(format!("duplicate rule id {id}")));
            }
            compatible.insert((label_a.min(label_b), label_a.max(label_b)));
            rules.push(BricsRule {
                id,
                label_a,
                label_b,
                pattern,
                description: fields.get(4).map(|s| s.trim().to_string()).unwrap_or_default(),
                atom_a,
                atom_b,
            });
        }
        Ok(BricsRules { rules, compatible })
    }

    /// The shipped table (or its `MOLFORGE_DATA_DIR` override).
    pub fn shipped() -> &'static BricsRules {
        &DEFAULT_RULES
    }

    pub fn rules(&self) -> &[BricsRule] {
        &self.rules
    }

    pub fn compatible(&self, a: u16, b: u16) -> bool {
        self.compatible.contains(&(a.min(b), a.max(b)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Attachment {
    /// Index of the dummy atom in the fragment.
    pub atom: usize,
    pub label: u16,
    /// Identifier of the cut that produced this attachment, if known.
    pub cut: Option<usize>,
}

/// A molecule piece whose open valences are labelled dummy atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub mol: Molecule,
    pub attachments: Vec<Attachment>,
}

impl Fragment {
    /// Reads a fragment written as SMILES with isotope-labelled dummies (`[16*]`).
    pub fn from_smiles(text: &str) -> Result<Fragment, ChemError> {
        Ok(Fragment::from_molecule(mol_from_smiles(text)?))
    }

    fn from_molecule(mol: Molecule) -> Fragment {
        let attachments = (0..mol.atom_count())
            .filter(|&i| mol.atom(i).element.is_dummy())
            .map(|i| Attachment { atom: i, label: mol.atom(i).isotope.unwrap_or(0), cut: None })
            .collect();
        Fragment { mol, attachments }
    }

    /// Canonical SMILES including the attachment labels.
    pub fn smiles(&self) -> String {
        canonical_smiles(&self.mol)
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.mol.heavy_atom_count()
    }

    /// Substructure query for the fragment body (attachments dropped).
    pub fn pattern(&self) -> Pattern {
        Pattern::from_molecule(&self.mol)
    }
}

/// Fragments using the shipped rule table.
pub fn brics_fragment(mol: &Molecule) -> Vec<Fragment> {
    fragment_with(mol, BricsRules::shipped())
}

/// Bond cuts selected for `mol`: `(atom on label_a side, atom on label_b side, label_a, label_b)`.
pub fn select_cuts(mol: &Molecule, rules: &BricsRules) -> Vec<(usize, usize, u16, u16)> {
    let ranks = canonical_ranks(mol);
    let target = Target::new(mol);
    let mut taken = vec![false; mol.bond_count()];
    let mut cuts: Vec<(usize, usize, u16, u16)> = Vec::new();
    // Union-find over atoms, rebuilt per trial cut to check piece sizes.
    for rule in &rules.rules {
        let mut hits: Vec<(usize, usize)> = rule
            .pattern
            .find_in(&target, None, usize::MAX)
            .into_iter()
            .map(|m| (m[rule.atom_a], m[rule.atom_b]))
            .collect();
        hits.sort_by_key(|&(a, b)| (ranks[a], ranks[b]));
        hits.dedup();
        for (a, b) in hits {
            let Some(bond) = mol.bond_between(a, b) else { continue };
            if taken[bond] {
                continue;
            }
            cuts.push((a, b, rule.label_a, rule.label_b));
            if smallest_piece(mol, &cuts) < MIN_FRAGMENT_HEAVY_ATOMS {
                cuts.pop();
            } else {
                taken[bond] = true;
            }
        }
    }
    cuts
}

fn smallest_piece(mol: &Molecule, cuts: &[(usize, usize, u16, u16)]) -> usize {
    let n = mol.atom_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for b in mol.bonds() {
        let cut = cuts.iter().any(|&(x, y, _, _)| (x == b.begin && y == b.end) || (x == b.end && y == b.begin));
        if !cut {
            let (ra, rb) = (find(&mut parent, b.begin), find(&mut parent, b.end));
            parent[ra] = rb;
        }
    }
    let mut size = vec![0usize; n];
    for i in 0..n {
        if mol.atom(i).is_heavy() {
            let r = find(&mut parent, i);
            size[r] += 1;
        }
    }
    let mut min = usize::MAX;
    for &(x, y, _, _) in cuts {
        for end in [x, y] {
            let r = find(&mut parent, end);
            min = min.min(size[r]);
        }
    }
    min
}

/// Cleaves every rule-matched bond (subject to the minimum piece size).
///
/// Fragments are returned sorted by canonical SMILES. Cut identifiers
/// number the cuts in selection order and pair the two attachments made by
/// each cut. A molecule without cleavable bonds comes back as one fragment.
pub fn fragment_with(mol: &Molecule, rules: &BricsRules) -> Vec<Fragment> {
    let cuts = select_cuts(mol, rules);
    if cuts.is_empty() {
        return vec![Fragment::from_molecule(mol.clone())];
    }
    let n = mol.atom_count();
    let split = mol.split_bonds(&cuts).expect("cut bonds exist");
    let mut out = Vec::new();
    for comp in split.components() {
        let (sub, map) = split.subgraph(&comp);
        let mut piece = sub.to_editable();
        if let Err(e) = sanitize(&mut piece) {
            log::warn!("fragment failed to sanitize: {e}");
            continue;
        }
        let attachments = (0..cuts.len())
            .flat_map(|k| [(n + 2 * k, k, cuts[k].2), (n + 2 * k + 1, k, cuts[k].3)])
            .filter_map(|(d, k, label)| map[d].map(|atom| Attachment { atom, label, cut: Some(k) }))
            .collect();
        out.push(Fragment { mol: piece, attachments });
    }
    out.sort_by_cached_key(|f| f.smiles());
    out
}

/// How attachments are paired during recombination.
enum Pairing<'r, R: Rng + ?Sized> {
    ByCut,
    Random(&'r mut R),
}

struct Assembly {
    mol: Molecule,
    attachments: Vec<Attachment>,
    /// Component id for every atom.
    owner: Vec<usize>,
}

impl Assembly {
    fn new(fragments: &[Fragment]) -> Assembly {
        let mut mol = Molecule::new();
        let mut attachments = Vec::new();
        let mut owner = Vec::new();
        for (k, f) in fragments.iter().enumerate() {
            let base = mol.atom_count();
            for a in f.mol.atoms() {
                mol.add_atom(a.clone());
                owner.push(k);
            }
            for b in f.mol.bonds() {
                let idx = mol.add_bond(base + b.begin, base + b.end, b.order).expect("fragment bonds are valid");
                mol.bond_mut(idx).kekule = b.kekule;
            }
            attachments.extend(f.attachments.iter().map(|a| Attachment { atom: a.atom + base, ..*a }));
        }
        // Offsets keep each fragment's tags meaningful: reference order is by index.
        Assembly { mol, attachments, owner }
    }

    fn heavy_in(&self, comp: usize) -> usize {
        (0..self.mol.atom_count()).filter(|&i| self.owner[i] == comp && self.mol.atom(i).is_heavy()).count()
    }

    fn candidates(&self, rules: &BricsRules, cap: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.attachments.len() {
            for j in i + 1..self.attachments.len() {
                let (a, b) = (self.attachments[i], self.attachments[j]);
                let (ca, cb) = (self.owner[a.atom], self.owner[b.atom]);
                if ca == cb || !rules.compatible(a.label, b.label) {
                    continue;
                }
                if self.heavy_in(ca) + self.heavy_in(cb) > cap {
                    continue;
                }
                out.push((i, j));
            }
        }
        out
    }

    fn join(&mut self, i: usize, j: usize) -> Result<(), ChemError> {
        let (a, b) = (self.attachments[i], self.attachments[j]);
        let (ca, cb) = (self.owner[a.atom], self.owner[b.atom]);
        let (mol, map) = self.mol.fuse_dummies(a.atom, b.atom)?;
        let mut owner = vec![0; mol.atom_count()];
        for (old, new) in map.iter().enumerate() {
            if let Some(new) = new {
                owner[*new] = if self.owner[old] == cb { ca } else { self.owner[old] };
            }
        }
        self.attachments = self
            .attachments
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i && *k != j)
            .map(|(_, at)| Attachment { atom: map[at.atom].expect("other dummies survive"), ..*at })
            .collect();
        self.mol = mol;
        self.owner = owner;
        Ok(())
    }

    /// The component `comp` with every open attachment replaced by hydrogen.
    fn finish(self, comp: usize) -> Result<Molecule, ChemError> {
        let mut mol = self.mol.to_editable();
        let mut drop = Vec::new();
        for at in &self.attachments {
            if self.owner[at.atom] != comp {
                continue;
            }
            for &(nb, b) in mol.neighbors(at.atom).to_vec().iter() {
                let order = mol.bond(b).kekule.valence();
                let atom = mol.atom_mut(nb);
                atom.implicit_h += order;
            }
            drop.push(at.atom);
        }
        let keep: Vec<usize> = (0..mol.atom_count()).filter(|&i| self.owner[i] == comp && !drop.contains(&i)).collect();
        let mut out = mol.subgraph(&keep).0;
        sanitize(&mut out)?;
        Ok(out)
    }
}

fn recombine<R: Rng + ?Sized>(
    fragments: &[Fragment],
    rules: &BricsRules,
    mut pairing: Pairing<'_, R>,
    cap: usize,
) -> Result<Molecule, ChemError> {
    if fragments.is_empty() {
        return Err(ChemError::NoSolution);
    }
    if fragments.len() == 1 && fragments[0].attachments.is_empty() {
        return Ok(fragments[0].mol.clone());
    }
    let mut asm = Assembly::new(fragments);
    let mut joins = 0;
    loop {
        let pick = match &mut pairing {
            Pairing::ByCut => {
                let mut found = None;
                'outer: for i in 0..asm.attachments.len() {
                    for j in i + 1..asm.attachments.len() {
                        let (a, b) = (asm.attachments[i], asm.attachments[j]);
                        if a.cut.is_some() && a.cut == b.cut && asm.owner[a.atom] != asm.owner[b.atom] {
                            found = Some((i, j));
                            break 'outer;
                        }
                    }
                }
                found
            }
            Pairing::Random(rng) => {
                let c = asm.candidates(rules, cap);
                (!c.is_empty()).then(|| c[rng.gen_range(0..c.len())])
            }
        };
        let Some((i, j)) = pick else { break };
        asm.join(i, j)?;
        joins += 1;
    }
    if joins == 0 && fragments.len() > 1 {
        return Err(ChemError::NoSolution);
    }
    let comp = asm.owner.first().copied().unwrap_or(0);
    asm.finish(comp)
}

/// Joins fragments at randomly chosen compatible attachments until none
/// remain joinable or the heavy-atom cap would be exceeded.
///
/// The piece grown from the first fragment is returned with leftover
/// attachments capped by hydrogen. Fragments that never join are dropped.
pub fn brics_recombine<R: Rng + ?Sized>(fragments: &[Fragment], rng: &mut R) -> Result<Molecule, ChemError> {
    recombine_with(fragments, BricsRules::shipped(), rng, DEFAULT_MAX_HEAVY_ATOMS)
}

pub fn recombine_with<R: Rng + ?Sized>(
    fragments: &[Fragment],
    rules: &BricsRules,
    rng: &mut R,
    max_heavy_atoms: usize,
) -> Result<Molecule, ChemError> {
    recombine(fragments, rules, Pairing::Random(rng), max_heavy_atoms)
}

/// Rejoins fragments along their original cuts.
pub fn reassemble(fragments: &[Fragment]) -> Result<Molecule, ChemError> {
    recombine::<rand::rngs::mock::StepRng>(fragments, BricsRules::shipped(), Pairing::ByCut, usize::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frags(s: &str) -> Vec<String> {
        brics_fragment(&mol_from_smiles(s).unwrap()).iter().map(Fragment::smiles).collect()
    }

    #[test]
    fn shipped_table_loads() {
        let r = BricsRules::shipped();
        assert_eq!(r.rules().len(), 12);
        assert!(r.compatible(3, 1) && r.compatible(16, 16) && !r.compatible(1, 16));
    }

    #[test]
    fn ethane_is_one_fragment() {
        assert_eq!(frags("CC"), vec!["CC".to_string()]);
    }

    #[test]
    fn ethyl_benzoate_splits_at_ester() {
        assert_eq!(frags("CCOC(=O)c1ccccc1"), vec!["[1*]C(=O)c1ccccc1".to_string(), "[3*]OCC".to_string()]);
    }

    #[test]
    fn methyl_groups_are_not_cut() {
        assert_eq!(frags("Cc1ccccc1"), vec!["Cc1ccccc1".to_string()]);
    }

    #[test]
    fn reassembly_restores_molecule() {
        for s in ["CCOC(=O)c1ccccc1", "CC(=O)Nc1ccc(OCC)cc1", "C[C@H](N)C(=O)NCc1ccccc1", "c1ccc(-c2ccccn2)cc1"] {
            let m = mol_from_smiles(s).unwrap();
            let back = reassemble(&brics_fragment(&m)).unwrap();
            assert_eq!(canonical_smiles(&back), canonical_smiles(&m), "{s}");
        }
    }

    #[test]
    fn single_closed_fragment_unchanged() {
        let f = Fragment::from_smiles("c1ccccc1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = brics_recombine(&[f.clone()], &mut rng).unwrap();
        assert_eq!(m, f.mol);
    }

    #[test]
    fn incompatible_labels_have_no_solution() {
        let a = Fragment::from_smiles("[1*]C(=O)c1ccccc1").unwrap();
        let b = Fragment::from_smiles("[16*]c1ccccc1").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(brics_recombine(&[a, b], &mut rng), Err(ChemError::NoSolution));
    }

    #[test]
    fn random_join_caps_leftovers() {
        let a = Fragment::from_smiles("[1*]C(=O)c1ccc([16*])cc1").unwrap();
        let b = Fragment::from_smiles("[3*]OCC").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = brics_recombine(&[a, b], &mut rng).unwrap();
        assert_eq!(canonical_smiles(&m), canonical_smiles(&mol_from_smiles("CCOC(=O)c1ccccc1").unwrap()));
    }
}
