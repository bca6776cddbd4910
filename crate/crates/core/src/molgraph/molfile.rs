//! MDL molfile (V2000) and SD file reading.
//!
//! Coordinates are discarded. Hydrogen counts are inferred during
//! sanitization; explicit hydrogen atoms are folded there as well.

use super::element::Element;
use super::error::{ChemError, MolfileError};
use super::mol::{Atom, BondOrder, Molecule};
use super::sanitize::sanitize;

fn field(line: &str, start: usize, end: usize) -> Option<&str> {
    let end = end.min(line.len());
    if start >= end {
        return None;
    }
    line.get(start..end).map(str::trim).filter(|s| !s.is_empty())
}

fn parse_counts(line: &str, line_no: usize) -> Result<(usize, usize), MolfileError> {
    let err = MolfileError::CountsLine { line: line_no };
    let fixed = (|| {
        let a = field(line, 0, 3)?.parse().ok()?;
        let b = field(line, 3, 6)?.parse().ok()?;
        Some((a, b))
    })();
    if let Some(c) = fixed {
        return Ok(c);
    }
    let mut it = line.split_whitespace();
    let a = it.next().and_then(|s| s.parse().ok()).ok_or(err.clone())?;
    let b = it.next().and_then(|s| s.parse().ok()).ok_or(err)?;
    Ok((a, b))
}

fn charge_from_code(code: i32) -> i8 {
    match code {
        1 => 3,
        2 => 2,
        3 => 1,
        5 => -1,
        6 => -2,
        7 => -3,
        _ => 0,
    }
}

/// Parses a single V2000 block into an unsanitized molecule.
pub fn parse_molfile(text: &str) -> Result<Molecule, MolfileError> {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let counts_line = lines.get(3).ok_or(MolfileError::CountsLine { line: 4 })?;
    let (n_atoms, n_bonds) = parse_counts(counts_line, 4)?;
    let mut mol = Molecule::new();
    for k in 0..n_atoms {
        let line_no = 5 + k;
        let line = lines.get(4 + k).ok_or(MolfileError::AtomLine { line: line_no })?;
        let symbol = field(line, 31, 34)
            .or_else(|| line.split_whitespace().nth(3))
            .ok_or(MolfileError::AtomLine { line: line_no })?;
        let element = match symbol {
            "R" | "R#" | "A" | "Q" | "*" => Some(Element::DUMMY),
            "D" | "T" => Some(Element::H),
            s => Element::from_symbol(s),
        }
        .ok_or_else(|| MolfileError::UnknownElement { line: line_no, symbol: symbol.to_string() })?;
        let mut atom = Atom::new(element);
        if let Some(code) = field(line, 36, 39).and_then(|s| s.parse::<i32>().ok()) {
            atom.charge = charge_from_code(code);
        }
        if let Some(diff) = field(line, 34, 36).and_then(|s| s.parse::<i32>().ok()) {
            if diff != 0 {
                let base = element.mass().round() as i32;
                atom.isotope = u16::try_from(base + diff).ok();
            }
        }
        match symbol {
            "D" => atom.isotope = Some(2),
            "T" => atom.isotope = Some(3),
            _ => {}
        }
        mol.add_atom(atom);
    }
    for k in 0..n_bonds {
        let line_no = 5 + n_atoms + k;
        let line = lines.get(4 + n_atoms + k).ok_or(MolfileError::BondLine { line: line_no })?;
        let nums: Option<(usize, usize, u8)> = (|| {
            Some((field(line, 0, 3)?.parse().ok()?, field(line, 3, 6)?.parse().ok()?, field(line, 6, 9)?.parse().ok()?))
        })()
        .or_else(|| {
            let mut it = line.split_whitespace().map(|s| s.parse::<usize>().ok());
            Some((it.next()??, it.next()??, it.next()?? as u8))
        });
        let (a, b, t) = nums.ok_or(MolfileError::BondLine { line: line_no })?;
        let order = match t {
            1 => BondOrder::Single,
            2 => BondOrder::Double,
            3 => BondOrder::Triple,
            4 => BondOrder::Aromatic,
            _ => BondOrder::Single,
        };
        if a == 0 || b == 0 {
            return Err(MolfileError::BondLine { line: line_no });
        }
        mol.add_bond(a - 1, b - 1, order).map_err(|source| MolfileError::Graph { line: line_no, source })?;
    }
    let mut charges_reset = false;
    for (k, line) in lines.iter().enumerate().skip(4 + n_atoms + n_bonds) {
        if line.starts_with("M  END") {
            break;
        }
        let is_chg = line.starts_with("M  CHG");
        let is_iso = line.starts_with("M  ISO");
        if !is_chg && !is_iso {
            continue;
        }
        if is_chg && !charges_reset {
            // A CHG property block supersedes charges from the atom block.
            for i in 0..mol.atom_count() {
                mol.atom_mut(i).charge = 0;
            }
            charges_reset = true;
        }
        let nums: Vec<i64> = line[6..].split_whitespace().filter_map(|s| s.parse().ok()).collect();
        for pair in nums.get(1..).unwrap_or(&[]).chunks(2) {
            let [idx, value] = pair else { continue };
            let Some(i) = usize::try_from(*idx).ok().filter(|&i| i >= 1 && i <= mol.atom_count()) else {
                return Err(MolfileError::AtomLine { line: k + 1 });
            };
            if is_chg {
                mol.atom_mut(i - 1).charge = (*value).clamp(-8, 8) as i8;
            } else {
                mol.atom_mut(i - 1).isotope = u16::try_from(*value).ok();
            }
        }
    }
    Ok(mol)
}

/// One record of an SD file.
#[derive(Debug, Clone)]
pub struct SdfRecord {
    /// 0-based record position in the file.
    pub index: usize,
    /// First header line of the block.
    pub name: String,
    pub molecule: Result<Molecule, ChemError>,
}

/// Iterates `$$$$`-separated records, parsing and sanitizing each.
pub struct SdfReader<'a> {
    blocks: std::vec::IntoIter<&'a str>,
    index: usize,
}

impl<'a> SdfReader<'a> {
    pub fn new(text: &'a str) -> SdfReader<'a> {
        let mut blocks = Vec::new();
        let mut start = 0;
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            if line.trim_end() == "$$$$" {
                blocks.push(&text[start..offset]);
                start = offset + line.len();
            }
            offset += line.len();
        }
        if !text[start..].trim().is_empty() {
            blocks.push(&text[start..]);
        }
        SdfReader { blocks: blocks.into_iter(), index: 0 }
    }
}

impl<'a> Iterator for SdfReader<'a> {
    type Item = SdfRecord;

    fn next(&mut self) -> Option<SdfRecord> {
        let block = self.blocks.next()?;
        let index = self.index;
        self.index += 1;
        let block = block.trim_start_matches(['\r', '\n']);
        let name = block.lines().next().unwrap_or("").trim().to_string();
        let molecule = parse_molfile(block).map_err(ChemError::from).and_then(|mut m| {
            sanitize(&mut m)?;
            Ok(m)
        });
        Some(SdfRecord { index, name, molecule })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::canon::canonical_smiles;
    use crate::molgraph::sanitize::mol_from_smiles;

    const METHANE: &str = "methane\n  test\n\n  1  0  0  0  0  0  0  0  0  0999 V2000\n    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0\nM  END\n";

    fn benzene_block() -> String {
        let mut s = String::from("benzene\n\n\n  6  6  0  0  0  0  0  0  0  0999 V2000\n");
        for _ in 0..6 {
            s.push_str("    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0\n");
        }
        for k in 0..6 {
            let order = if k % 2 == 0 { 2 } else { 1 };
            s.push_str(&format!("{:>3}{:>3}{:>3}  0\n", k + 1, (k + 1) % 6 + 1, order));
        }
        s.push_str("M  END\n");
        s
    }

    #[test]
    fn methane_block() {
        let mut m = parse_molfile(METHANE).unwrap();
        sanitize(&mut m).unwrap();
        assert_eq!(m.atom_count(), 1);
        assert_eq!(m.atom(0).implicit_h, 4);
    }

    #[test]
    fn kekule_benzene_matches_smiles() {
        let mut m = parse_molfile(&benzene_block()).unwrap();
        sanitize(&mut m).unwrap();
        assert_eq!(canonical_smiles(&m), canonical_smiles(&mol_from_smiles("c1ccccc1").unwrap()));
    }

    #[test]
    fn malformed_counts_and_truncation() {
        let bad = "x\n\n\nabc\n";
        assert_eq!(parse_molfile(bad).unwrap_err(), MolfileError::CountsLine { line: 4 });
        let truncated = "x\n\n\n  2  0  0  0  0  0  0  0  0  0999 V2000\n    0.0000    0.0000    0.0000 C   0  0\n";
        assert_eq!(parse_molfile(truncated).unwrap_err(), MolfileError::AtomLine { line: 6 });
    }

    #[test]
    fn charge_block_and_sdf_records() {
        let block = "amm\n\n\n  1  0  0  0  0  0  0  0  0  0999 V2000\n    0.0000    0.0000    0.0000 N   0  0  0  0  0  0  0  0  0  0  0  0\nM  CHG  1   1   1\nM  END\n";
        let text = format!("{METHANE}$$$$\n{block}$$$$\n");
        let recs: Vec<SdfRecord> = SdfReader::new(&text).collect();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].name, "amm");
        let m = recs[1].molecule.as_ref().unwrap();
        assert_eq!(m.atom(0).charge, 1);
        assert_eq!(m.atom(0).implicit_h, 4);
    }
}
