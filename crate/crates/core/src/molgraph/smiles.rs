//! SMILES reader.
//!
//! Produces an unsanitized [`Molecule`] whose atom order follows token
//! order. Hydrogen counts of organic-subset atoms are left for
//! [`sanitize`](super::sanitize) to infer; bracket atoms keep the count they
//! declare.

use std::collections::BTreeMap;

use super::element::Element;
use super::error::{SmilesError, SmilesErrorKind};
use super::mol::{permutation_parity, Atom, BondOrder, Chirality, Molecule, Neighbor};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Atom(usize),
    H,
    Ring(u16),
}

struct RingOpen {
    atom: usize,
    bond: Option<BondOrder>,
    offset: usize,
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    mol: Molecule,
    slots: Vec<Vec<Slot>>,
    written_chirality: Vec<Chirality>,
    prev: Option<usize>,
    pending: Option<(BondOrder, usize)>,
    branches: Vec<(Option<usize>, usize)>,
    rings: BTreeMap<u16, RingOpen>,
}

/// Parses a SMILES string.
pub fn parse_smiles(text: &str) -> Result<Molecule, SmilesError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(SmilesError::new(0, SmilesErrorKind::Empty));
    }
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        mol: Molecule::new(),
        slots: Vec::new(),
        written_chirality: Vec::new(),
        prev: None,
        pending: None,
        branches: Vec::new(),
        rings: BTreeMap::new(),
    };
    p.run()?;
    Ok(p.finish())
}

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, kind: SmilesErrorKind) -> Result<T, SmilesError> {
        Err(SmilesError::new(offset, kind))
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<u8> {
        self.text.get(self.pos + k).copied()
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    if self.prev.is_none() {
                        return self.err(start, SmilesErrorKind::UnexpectedChar('('));
                    }
                    self.branches.push((self.prev, start));
                    self.pos += 1;
                }
                b')' => {
                    if self.pending.is_some() {
                        return self.err(start, SmilesErrorKind::DanglingBond);
                    }
                    match self.branches.pop() {
                        Some((prev, _)) => self.prev = prev,
                        None => return self.err(start, SmilesErrorKind::UnbalancedParenthesis),
                    }
                    self.pos += 1;
                }
                b'-' | b'/' | b'\\' => self.set_bond(BondOrder::Single, start)?,
                b'=' => self.set_bond(BondOrder::Double, start)?,
                b'#' => self.set_bond(BondOrder::Triple, start)?,
                b':' => self.set_bond(BondOrder::Aromatic, start)?,
                b'.' => {
                    if self.pending.is_some() {
                        return self.err(start, SmilesErrorKind::DanglingBond);
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' => {
                    self.pos += 1;
                    self.ring_bond((c - b'0') as u16, start)?;
                }
                b'%' => {
                    let (d1, d2) = (self.peek_at(1), self.peek_at(2));
                    match (d1, d2) {
                        (Some(a @ b'0'..=b'9'), Some(b @ b'0'..=b'9')) => {
                            self.pos += 3;
                            self.ring_bond(((a - b'0') * 10 + (b - b'0')) as u16, start)?;
                        }
                        _ => return self.err(start, SmilesErrorKind::UnexpectedChar('%')),
                    }
                }
                b'[' => {
                    let atom = self.bracket_atom()?;
                    self.attach(atom, start)?;
                }
                _ => {
                    let atom = self.organic_atom()?;
                    self.attach(atom, start)?;
                }
            }
        }
        if let Some((_, off)) = self.pending {
            return self.err(off, SmilesErrorKind::DanglingBond);
        }
        if !self.branches.is_empty() {
            return self.err(self.text.len(), SmilesErrorKind::UnbalancedParenthesis);
        }
        if let Some((&digit, open)) = self.rings.iter().next() {
            return self.err(open.offset, SmilesErrorKind::UnclosedRing(digit));
        }
        Ok(())
    }

    fn set_bond(&mut self, order: BondOrder, offset: usize) -> Result<(), SmilesError> {
        if self.prev.is_none() || self.pending.is_some() {
            return self.err(offset, SmilesErrorKind::UnexpectedChar(self.text[offset] as char));
        }
        self.pending = Some((order, offset));
        self.pos += 1;
        Ok(())
    }

    fn default_order(&self, a: usize, b: usize) -> BondOrder {
        if self.mol.atom(a).aromatic && self.mol.atom(b).aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn attach(&mut self, parsed: (Atom, Chirality), _offset: usize) -> Result<(), SmilesError> {
        let (atom, chirality) = parsed;
        let has_h = atom.h_fixed && atom.implicit_h > 0;
        let idx = self.mol.add_atom(atom);
        self.slots.push(Vec::new());
        self.written_chirality.push(chirality);
        if let Some(prev) = self.prev {
            let order = match self.pending.take() {
                Some((o, _)) => o,
                None => self.default_order(prev, idx),
            };
            self.mol.add_bond(prev, idx, order).expect("fresh atom cannot duplicate a bond");
            self.slots[idx].push(Slot::Atom(prev));
            self.slots[prev].push(Slot::Atom(idx));
        }
        if has_h {
            self.slots[idx].push(Slot::H);
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn ring_bond(&mut self, digit: u16, offset: usize) -> Result<(), SmilesError> {
        let Some(atom) = self.prev else {
            return self.err(offset, SmilesErrorKind::UnexpectedChar(self.text[offset] as char));
        };
        let bond = self.pending.take().map(|(o, _)| o);
        match self.rings.remove(&digit) {
            None => {
                self.rings.insert(digit, RingOpen { atom, bond, offset });
                self.slots[atom].push(Slot::Ring(digit));
            }
            Some(open) => {
                let order = match (open.bond, bond) {
                    (Some(a), Some(b)) if a != b => {
                        return self.err(offset, SmilesErrorKind::RingBondConflict)
                    }
                    (Some(a), _) | (None, Some(a)) => a,
                    (None, None) => self.default_order(open.atom, atom),
                };
                if open.atom == atom || self.mol.bond_between(open.atom, atom).is_some() {
                    return self.err(offset, SmilesErrorKind::DuplicateBond);
                }
                self.mol.add_bond(open.atom, atom, order).expect("checked above");
                if let Some(s) = self.slots[open.atom].iter_mut().find(|s| **s == Slot::Ring(digit)) {
                    *s = Slot::Atom(atom);
                }
                self.slots[atom].push(Slot::Atom(open.atom));
            }
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<(Atom, Chirality), SmilesError> {
        let start = self.pos;
        let c = self.text[start];
        let next = self.peek_at(1);
        let (element, aromatic, len) = match c {
            b'C' if next == Some(b'l') => (Element::CL, false, 2),
            b'B' if next == Some(b'r') => (Element::BR, false, 2),
            b'B' => (Element::B, false, 1),
            b'C' => (Element::C, false, 1),
            b'N' => (Element::N, false, 1),
            b'O' => (Element::O, false, 1),
            b'P' => (Element::P, false, 1),
            b'S' => (Element::S, false, 1),
            b'F' => (Element::F, false, 1),
            b'I' => (Element::I, false, 1),
            b'b' => (Element::B, true, 1),
            b'c' => (Element::C, true, 1),
            b'n' => (Element::N, true, 1),
            b'o' => (Element::O, true, 1),
            b'p' => (Element::P, true, 1),
            b's' => (Element::S, true, 1),
            b'*' => (Element::DUMMY, false, 1),
            c if c.is_ascii_alphabetic() => {
                return self.err(start, SmilesErrorKind::UnknownElement((c as char).to_string()))
            }
            c => return self.err(start, SmilesErrorKind::UnexpectedChar(c as char)),
        };
        self.pos += len;
        let mut atom = Atom::new(element);
        atom.aromatic = aromatic;
        Ok((atom, Chirality::None))
    }

    fn read_number(&mut self) -> Option<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            std::str::from_utf8(&self.text[start..self.pos]).ok()?.parse().ok()
        }
    }

    fn bracket_atom(&mut self) -> Result<(Atom, Chirality), SmilesError> {
        let open = self.pos;
        self.pos += 1;
        let isotope = self.read_number();
        let sym_start = self.pos;
        let (element, aromatic) = self.bracket_symbol()?;
        let mut atom = Atom::new(element);
        atom.aromatic = aromatic;
        atom.h_fixed = true;
        atom.isotope = match isotope {
            Some(v) if v > u16::MAX as u32 => {
                return self.err(open + 1, SmilesErrorKind::UnexpectedChar('0'))
            }
            v => v.map(|v| v as u16),
        };
        if aromatic && !element.can_be_aromatic() {
            return self.err(sym_start, SmilesErrorKind::UnknownElement(
                String::from_utf8_lossy(&self.text[sym_start..self.pos]).into_owned(),
            ));
        }
        let mut chirality = Chirality::None;
        if self.peek() == Some(b'@') {
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
                chirality = Chirality::Cw;
            } else if self.text[self.pos..].starts_with(b"TH1") {
                self.pos += 3;
                chirality = Chirality::Ccw;
            } else if self.text[self.pos..].starts_with(b"TH2") {
                self.pos += 3;
                chirality = Chirality::Cw;
            } else {
                chirality = Chirality::Ccw;
            }
        }
        if self.peek() == Some(b'H') {
            self.pos += 1;
            let n = self.read_number().unwrap_or(1);
            atom.implicit_h = n.min(9) as u8;
        }
        match self.peek() {
            Some(sign @ (b'+' | b'-')) => {
                self.pos += 1;
                let unit: i32 = if sign == b'+' { 1 } else { -1 };
                let mut charge = unit;
                if let Some(n) = self.read_number() {
                    charge = unit * n as i32;
                } else {
                    while self.peek() == Some(sign) {
                        self.pos += 1;
                        charge += unit;
                    }
                }
                atom.charge = charge.clamp(-8, 8) as i8;
            }
            _ => {}
        }
        if self.peek() == Some(b':') {
            self.pos += 1;
            atom.map = self.read_number().unwrap_or(0).min(u16::MAX as u32) as u16;
        }
        match self.peek() {
            Some(b']') => {
                self.pos += 1;
                Ok((atom, chirality))
            }
            Some(c) => self.err(self.pos, SmilesErrorKind::UnexpectedChar(c as char)),
            None => self.err(open, SmilesErrorKind::UnterminatedBracket),
        }
    }

    fn bracket_symbol(&mut self) -> Result<(Element, bool), SmilesError> {
        let start = self.pos;
        let Some(c) = self.peek() else {
            return self.err(start, SmilesErrorKind::UnterminatedBracket);
        };
        if c == b'*' {
            self.pos += 1;
            return Ok((Element::DUMMY, false));
        }
        if c.is_ascii_lowercase() {
            let two = self.peek_at(1).filter(|n| n.is_ascii_lowercase());
            if let Some(n) = two {
                let sym = [c.to_ascii_uppercase() as char, n as char].iter().collect::<String>();
                if matches!(sym.as_str(), "Se" | "As") {
                    self.pos += 2;
                    return Ok((Element::from_symbol(&sym).expect("listed"), true));
                }
            }
            let sym = (c.to_ascii_uppercase() as char).to_string();
            return match Element::from_symbol(&sym) {
                Some(e) if matches!(c, b'b' | b'c' | b'n' | b'o' | b'p' | b's') => {
                    self.pos += 1;
                    Ok((e, true))
                }
                _ => self.err(start, SmilesErrorKind::UnknownElement((c as char).to_string())),
            };
        }
        if !c.is_ascii_uppercase() {
            return self.err(start, SmilesErrorKind::UnexpectedChar(c as char));
        }
        if let Some(n) = self.peek_at(1).filter(|n| n.is_ascii_lowercase()) {
            let sym: String = [c as char, n as char].iter().collect();
            if let Some(e) = Element::from_symbol(&sym) {
                self.pos += 2;
                return Ok((e, false));
            }
        }
        let sym = (c as char).to_string();
        match Element::from_symbol(&sym) {
            Some(e) => {
                self.pos += 1;
                Ok((e, false))
            }
            None => {
                let mut end = start + 1;
                while end < self.text.len() && self.text[end].is_ascii_lowercase() {
                    end += 1;
                }
                let name = String::from_utf8_lossy(&self.text[start..end]).into_owned();
                self.err(start, SmilesErrorKind::UnknownElement(name))
            }
        }
    }

    fn finish(mut self) -> Molecule {
        for i in 0..self.mol.atom_count() {
            let tag = self.written_chirality[i];
            if !tag.is_set() {
                continue;
            }
            let written: Vec<Neighbor> = self.slots[i]
                .iter()
                .map(|s| match s {
                    Slot::Atom(a) => Neighbor::Atom(*a),
                    Slot::H | Slot::Ring(_) => Neighbor::ImplicitH,
                })
                .collect();
            let reference = self.mol.chiral_reference(i);
            let stored = match permutation_parity(&written, &reference) {
                Some(odd) if reference.len() >= 3 => tag.invert_if(odd),
                _ => Chirality::None,
            };
            self.mol.atom_mut(i).chirality = stored;
        }
        self.mol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn methane_and_benzene() {
        let m = parse_smiles("C").unwrap();
        assert_eq!(m.atom_count(), 1);
        let b = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(b.atom_count(), 6);
        assert!(b.atoms().iter().all(|a| a.aromatic));
        assert!(b.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
    }

    #[test]
    fn unbalanced_paren_offset() {
        let e = parse_smiles("C(C").unwrap_err();
        assert_eq!(e.offset, 3);
        assert_eq!(e.kind, SmilesErrorKind::UnbalancedParenthesis);
        let e = parse_smiles("CC)C").unwrap_err();
        assert_eq!(e.offset, 2);
    }

    #[test]
    fn ring_errors() {
        let e = parse_smiles("C1CC").unwrap_err();
        assert_eq!(e.kind, SmilesErrorKind::UnclosedRing(1));
        assert_eq!(e.offset, 1);
        let e = parse_smiles("C=1CC-1").unwrap_err();
        assert_eq!(e.kind, SmilesErrorKind::RingBondConflict);
        assert_eq!(e.offset, 6);
        assert!(parse_smiles("C=1CCC=1").is_ok());
    }

    #[test]
    fn unknown_element() {
        let e = parse_smiles("CXC").unwrap_err();
        assert_eq!(e.offset, 1);
        assert!(matches!(e.kind, SmilesErrorKind::UnknownElement(_)));
        assert!(parse_smiles("[Xe]").is_err());
        assert!(parse_smiles("[Fe+2]").is_ok());
    }

    #[test]
    fn bracket_fields() {
        let m = parse_smiles("[13CH3-:7]").unwrap();
        let a = m.atom(0);
        assert_eq!(a.isotope, Some(13));
        assert_eq!(a.implicit_h, 3);
        assert_eq!(a.charge, -1);
        assert_eq!(a.map, 7);
        assert!(a.h_fixed);
        let m = parse_smiles("[NH4+]").unwrap();
        assert_eq!(m.atom(0).charge, 1);
        let m = parse_smiles("[O--]").unwrap();
        assert_eq!(m.atom(0).charge, -2);
    }

    #[test]
    fn percent_ring_closures_and_fragments() {
        let m = parse_smiles("C%12CC%12.O").unwrap();
        assert_eq!(m.atom_count(), 4);
        assert_eq!(m.bond_count(), 3);
        assert_eq!(m.components().len(), 2);
    }

    #[test]
    fn chirality_is_normalised_to_reference_order() {
        // Two spellings of the same centre.
        let a = parse_smiles("N[C@@H](C)C(=O)O").unwrap();
        let b = parse_smiles("N[C@H](C(=O)O)C").unwrap();
        // Both have reference order [H, 0(N), 2, 3] / [H, 0(N), 2(C=O C), 6(C)].
        // Map b onto a's numbering: b atoms: N0 C1 C2 O3 O4 C5.
        assert!(a.atom(1).chirality.is_set());
        assert!(b.atom(1).chirality.is_set());
        let perm_b_to_a = [0, 1, 3, 4, 5, 2];
        let b_in_a = b.permuted(&perm_b_to_a);
        assert_eq!(b_in_a.atom(1).chirality, a.atom(1).chirality);
    }
}
