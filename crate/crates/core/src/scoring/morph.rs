//! Rule-based structure morphing: bioisosteric replacement and metabolic
//! soft-spot blocking.

use std::collections::BTreeSet;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use super::error::ScoringError;
use crate::data;
use crate::molgraph::smarts::Target;
use crate::molgraph::{canonical_smiles, parse_smiles, sanitize, Chirality, Molecule, Pattern, RuleError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphMode {
    Bioisostere,
    Metabolic,
}

impl std::str::FromStr for MorphMode {
    type Err = String;
    fn from_str(s: &str) -> Result<MorphMode, String> {
        match s.to_ascii_lowercase().as_str() {
            "bioisostere" => Ok(MorphMode::Bioisostere),
            "metabolic" => Ok(MorphMode::Metabolic),
            other => Err(format!("unknown morph mode {other:?} (expected bioisostere or metabolic)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MorphRule {
    pub id: String,
    pub mode: MorphMode,
    pub pattern: Pattern,
    pub replacement: Molecule,
    pub description: String,
}

#[derive(Debug, Clone)]
pub struct MorphRules {
    rules: Vec<MorphRule>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub smiles: String,
    pub mol: Molecule,
    pub rule_id: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MorphOutcome {
    /// Distinct variants in order of first appearance (rule order, then match order).
    pub variants: Vec<Variant>,
    /// Rule applications dropped because the product did not sanitize or fell apart.
    pub dropped: usize,
}

static SHIPPED: Lazy<MorphRules> =
    Lazy::new(|| MorphRules::parse(&data::table(data::MORPH)).expect("shipped morph table must compile"));

impl MorphRules {
    /// Parses `id <TAB> mode <TAB> pattern <TAB> replacement <TAB> description`.
    pub fn parse(text: &str) -> Result<MorphRules, ScoringError> {
        let mut rules: Vec<MorphRule> = Vec::new();
        for (line_no, line) in data::lines(text) {
            let err = |m: String| RuleError::new(data::MORPH, line_no, m);
            let f: Vec<&str> = line.split('\t').map(str::trim).collect();
            if f.len() < 4 {
                return Err(err(format!("expected at least 4 tab-separated fields, found {}", f.len())).into());
            }
            let mode: MorphMode = f[1].parse().map_err(err)?;
            let pattern = Pattern::parse(f[2]).map_err(|e| err(e.to_string()))?;
            let replacement = parse_smiles(f[3]).map_err(|e| err(format!("replacement: {e}")))?;
            for a in replacement.atoms() {
                if a.map != 0 && pattern.mapped_atom(a.map).is_none() {
                    return Err(err(format!("replacement map class {} absent from pattern", a.map)).into());
                }
                if a.map == 0 && a.element.is_dummy() {
                    return Err(err("unmapped wildcard in replacement".into()).into());
                }
            }
            if rules.iter().any(|r| r.id == f[0]) {
                return Err(err(format!("duplicate rule id {}", f[0])).into());
            }
            rules.push(MorphRule {
                id: f[0].to_string(),
                mode,
                pattern,
                replacement,
                description: f.get(4).copied().unwrap_or("").to_string(),
            });
        }
        if rules.is_empty() {
            return Err(ScoringError::EmptyRules(data::MORPH.into()));
        }
        Ok(MorphRules { rules })
    }

    pub fn shipped() -> &'static MorphRules {
        &SHIPPED
    }

    pub fn rules(&self) -> &[MorphRule] {
        &self.rules
    }
}

impl MorphRule {
    /// Applies the rule at one embedding; `None` when the product is not a
    /// single sanitizable molecule.
    pub fn apply_at(&self, mol: &Molecule, embedding: &[usize]) -> Option<Molecule> {
        let mut work = mol.to_editable();
        let anchor = |map: u16| self.pattern.mapped_atom(map).map(|k| embedding[k]);
        let mut index = Vec::with_capacity(self.replacement.atom_count());
        for ra in self.replacement.atoms() {
            if ra.map != 0 {
                let a = anchor(ra.map)?;
                if !ra.element.is_dummy() {
                    let atom = work.atom_mut(a);
                    atom.element = ra.element;
                    atom.charge = ra.charge;
                    atom.isotope = None;
                    atom.h_fixed = ra.h_fixed;
                    atom.implicit_h = ra.implicit_h;
                }
                index.push(a);
            } else {
                let mut atom = ra.clone();
                atom.chirality = Chirality::None;
                index.push(work.add_atom(atom));
            }
        }
        for rb in self.replacement.bonds() {
            let (x, y) = (index[rb.begin], index[rb.end]);
            match work.bond_between(x, y) {
                Some(b) => {
                    let bond = work.bond_mut(b);
                    bond.order = rb.order;
                    bond.kekule = rb.kekule;
                }
                None => {
                    work.add_bond(x, y, rb.order).ok()?;
                }
            }
        }
        let removed: Vec<usize> = self
            .pattern
            .atoms()
            .iter()
            .enumerate()
            .filter(|(_, pa)| pa.map == 0)
            .map(|(k, _)| embedding[k])
            .collect();
        let mut out = work.remove_atoms(&removed);
        if out.is_empty() || out.is_multi_fragment() {
            return None;
        }
        sanitize(&mut out).ok()?;
        Some(out)
    }
}

/// All single-rule variants of `mol` for the given mode.
pub fn morph(mol: &Molecule, rules: &MorphRules, mode: MorphMode) -> MorphOutcome {
    let original = canonical_smiles(mol);
    let target = Target::new(mol);
    let mut seen = BTreeSet::new();
    let mut out = MorphOutcome::default();
    for rule in rules.rules.iter().filter(|r| r.mode == mode) {
        for emb in rule.pattern.find_in(&target, None, usize::MAX) {
            match rule.apply_at(mol, &emb) {
                Some(v) => {
                    let smiles = canonical_smiles(&v);
                    if smiles != original && seen.insert(smiles.clone()) {
                        out.variants.push(Variant { smiles, mol: v, rule_id: rule.id.clone() });
                    }
                }
                None => out.dropped += 1,
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::mol_from_smiles;

    fn canon(s: &str) -> String {
        canonical_smiles(&mol_from_smiles(s).unwrap())
    }

    fn variants(s: &str, mode: MorphMode) -> Vec<String> {
        morph(&mol_from_smiles(s).unwrap(), MorphRules::shipped(), mode).variants.into_iter().map(|v| v.smiles).collect()
    }

    #[test]
    fn acid_to_tetrazole() {
        let v = variants("OC(=O)c1ccccc1", MorphMode::Bioisostere);
        assert!(v.contains(&canon("c1ccccc1-c1nnn[nH]1")), "{v:?}");
    }

    #[test]
    fn no_match_no_variants() {
        assert!(variants("CCCC", MorphMode::Metabolic).is_empty());
    }

    #[test]
    fn para_fluorination() {
        let v = variants("CCc1ccccc1", MorphMode::Metabolic);
        assert_eq!(v, vec![canon("CCc1ccc(F)cc1")]);
    }
}
