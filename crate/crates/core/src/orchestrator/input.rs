//! Reading molecule files (.smi or .sdf).

use std::path::Path;

use super::error::OrchestratorError;
use crate::molgraph::smi::read_smi;
use crate::molgraph::{canonical_smiles, Molecule, SdfReader};

#[derive(Debug, Clone)]
pub struct InputRecord {
    pub name: Option<String>,
    /// SMILES as written, or the canonical SMILES for SD records.
    pub text: String,
    pub mol: Result<Molecule, String>,
}

fn is_sdf(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(), Some("sdf" | "sd" | "mol"))
}

/// Parses every record; per-record failures are kept, not raised.
pub fn parse_records(text: &str, sdf: bool) -> Vec<InputRecord> {
    if sdf {
        SdfReader::new(text)
            .map(|r| InputRecord {
                name: Some(r.name).filter(|n| !n.is_empty()),
                text: r.molecule.as_ref().map(canonical_smiles).unwrap_or_default(),
                mol: r.molecule.map_err(|e| e.to_string()),
            })
            .collect()
    } else {
        read_smi(text)
            .into_iter()
            .map(|r| InputRecord { mol: r.parse().map_err(|e| e.to_string()), name: r.name, text: r.smiles })
            .collect()
    }
}

pub fn read_records(path: &Path) -> Result<Vec<InputRecord>, OrchestratorError> {
    let text = std::fs::read_to_string(path).map_err(|e| OrchestratorError::io(path, e))?;
    Ok(parse_records(&text, is_sdf(path)))
}

/// Valid molecules only; an error if none parse.
pub fn read_molecules(path: &Path) -> Result<Vec<Molecule>, OrchestratorError> {
    let records = read_records(path)?;
    let total = records.len();
    let mols: Vec<Molecule> = records.into_iter().filter_map(|r| r.mol.ok()).filter(|m| !m.is_empty()).collect();
    if mols.is_empty() {
        return Err(OrchestratorError::input(path, format!("no valid molecules among {total} records")));
    }
    if mols.len() < total {
        log::warn!("{}: skipped {} unparseable records", path.display(), total - mols.len());
    }
    Ok(mols)
}
