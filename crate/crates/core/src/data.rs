//! Shipped rule and contribution tables.
//!
//! Every table is embedded at compile time. Setting `MOLFORGE_DATA_DIR`
//! makes the loader prefer a file of the same name from that directory,
//! so tables can be audited and replaced without rebuilding.

use std::borrow::Cow;
use std::path::PathBuf;

pub const VALENCE: &str = "valence.txt";
pub const LOGP: &str = "logp.txt";
pub const TPSA: &str = "tpsa.txt";
pub const BRICS: &str = "brics.txt";
pub const MCF: &str = "mcf.txt";
pub const DRUG_LIKENESS: &str = "druglike.txt";
pub const MORPH: &str = "morph.txt";
pub const CORPUS: &str = "nci_1k.smi";

const EMBEDDED: &[(&str, &str)] = &[
    (VALENCE, include_str!("../data/valence.txt")),
    (LOGP, include_str!("../data/logp.txt")),
    (TPSA, include_str!("../data/tpsa.txt")),
    (BRICS, include_str!("../data/brics.txt")),
    (MCF, include_str!("../data/mcf.txt")),
    (DRUG_LIKENESS, include_str!("../data/druglike.txt")),
    (MORPH, include_str!("../data/morph.txt")),
    (CORPUS, include_str!("../data/nci_1k.smi")),
];

/// Environment variable naming a directory of replacement tables.
pub const DATA_DIR_ENV: &str = "MOLFORGE_DATA_DIR";

fn override_path(name: &str) -> Option<PathBuf> {
    let dir = std::env::var_os(DATA_DIR_ENV)?;
    let path = PathBuf::from(dir).join(name);
    path.is_file().then_some(path)
}

/// Returns the text of a named table, preferring the override directory.
pub fn table(name: &str) -> Cow<'static, str> {
    if let Some(path) = override_path(name) {
        match std::fs::read_to_string(&path) {
            Ok(text) => return Cow::Owned(text),
            Err(e) => log::warn!("cannot read {}: {e}; using embedded table", path.display()),
        }
    }
    Cow::Borrowed(embedded(name).unwrap_or_else(|| panic!("unknown data table {name}")))
}

/// The compiled-in copy of a table, ignoring any override.
pub fn embedded(name: &str) -> Option<&'static str> {
    EMBEDDED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Iterates the meaningful lines of a table: trimmed, without blanks or `#` comments.
pub fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}
