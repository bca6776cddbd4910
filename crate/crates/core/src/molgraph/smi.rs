//! Line-oriented `.smi` files: SMILES plus an optional tab-separated name.

use std::fmt::Write as _;

use super::error::ChemError;
use super::mol::Molecule;
use super::sanitize::mol_from_smiles;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmiRecord {
    /// 1-based line number in the source text.
    pub line: usize,
    pub smiles: String,
    pub name: Option<String>,
}

impl SmiRecord {
    pub fn parse(&self) -> Result<Molecule, ChemError> {
        mol_from_smiles(&self.smiles)
    }
}

/// Reads records, skipping blank lines and lines starting with `#`.
///
/// The name is everything after the first tab; without a tab, anything after
/// the first run of whitespace.
pub fn read_smi(text: &str) -> Vec<SmiRecord> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (smiles, name) = match line.split_once('\t') {
            Some((s, n)) => (s.trim(), Some(n.trim())),
            None => {
                let t = line.trim();
                match t.split_once(char::is_whitespace) {
                    Some((s, n)) => (s, Some(n.trim())),
                    None => (t, None),
                }
            }
        };
        out.push(SmiRecord {
            line: i + 1,
            smiles: smiles.to_string(),
            name: name.filter(|n| !n.is_empty()).map(str::to_string),
        });
    }
    out
}

pub fn read_smi_file(path: &std::path::Path) -> std::io::Result<Vec<SmiRecord>> {
    Ok(read_smi(&std::fs::read_to_string(path)?))
}

/// Writes one `smiles[\tname]` line per record.
pub fn write_smi<'a, I>(records: I) -> String
where
    I: IntoIterator<Item = (&'a str, Option<&'a str>)>,
{
    let mut out = String::new();
    for (smiles, name) in records {
        match name {
            Some(n) => {
                let _ = writeln!(out, "{smiles}\t{n}");
            }
            None => {
                let _ = writeln!(out, "{smiles}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_comments_and_blanks() {
        let recs = read_smi("# header\nCCO\tethanol\n\nc1ccccc1 benzene ring\nC\n");
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[0].name.as_deref(), Some("ethanol"));
        assert_eq!(recs[0].line, 2);
        assert_eq!(recs[1].smiles, "c1ccccc1");
        assert_eq!(recs[1].name.as_deref(), Some("benzene ring"));
        assert_eq!(recs[2].name, None);
    }

    #[test]
    fn write_then_read() {
        let text = write_smi([("CCO", Some("e")), ("C", None)]);
        let recs = read_smi(&text);
        assert_eq!(recs[0].smiles, "CCO");
        assert_eq!(recs[1].name, None);
    }
}
