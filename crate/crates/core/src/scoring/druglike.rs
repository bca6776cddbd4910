//! Drug-likeness as the fraction of satisfied descriptor-range rules.

use once_cell::sync::Lazy;

use super::error::ScoringError;
use crate::data;
use crate::molgraph::{DescriptorVector, RuleError};

#[derive(Debug, Clone, PartialEq)]
pub struct DrugRule {
    pub id: String,
    pub descriptor: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub description: String,
}

impl DrugRule {
    pub fn satisfied(&self, desc: &DescriptorVector) -> bool {
        let v = desc.get(&self.descriptor).expect("descriptor name checked at load");
        self.min.map_or(true, |m| v >= m) && self.max.map_or(true, |m| v <= m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrugLikenessRules {
    rules: Vec<DrugRule>,
}

static SHIPPED: Lazy<DrugLikenessRules> = Lazy::new(|| {
    DrugLikenessRules::parse(&data::table(data::DRUG_LIKENESS)).expect("shipped drug-likeness table must load")
});

impl DrugLikenessRules {
    /// Parses `id <TAB> descriptor <TAB> min <TAB> max <TAB> description`; `-` is an open bound.
    pub fn parse(text: &str) -> Result<DrugLikenessRules, ScoringError> {
        let mut rules = Vec::new();
        for (line_no, line) in data::lines(text) {
            let err = |m: String| RuleError::new(data::DRUG_LIKENESS, line_no, m);
            let f: Vec<&str> = line.split('\t').map(str::trim).collect();
            if f.len() < 4 {
                return Err(err(format!("expected at least 4 tab-separated fields, found {}", f.len())).into());
            }
            let probe = DescriptorVector::default();
            if probe.get(f[1]).is_none() {
                return Err(err(format!("unknown descriptor {:?}", f[1])).into());
            }
            let bound = |s: &str| -> Result<Option<f64>, RuleError> {
                if s == "-" {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| err(format!("bad bound {s:?}")))
                }
            };
            rules.push(DrugRule {
                id: f[0].to_string(),
                descriptor: f[1].to_string(),
                min: bound(f[2])?,
                max: bound(f[3])?,
                description: f.get(4).copied().unwrap_or("").to_string(),
            });
        }
        if rules.is_empty() {
            return Err(ScoringError::EmptyRules(data::DRUG_LIKENESS.into()));
        }
        Ok(DrugLikenessRules { rules })
    }

    pub fn shipped() -> &'static DrugLikenessRules {
        &SHIPPED
    }

    pub fn rules(&self) -> &[DrugRule] {
        &self.rules
    }

    pub fn score(&self, desc: &DescriptorVector) -> f64 {
        self.rules.iter().filter(|r| r.satisfied(desc)).count() as f64 / self.rules.len() as f64
    }
}

pub fn drug_likeness(desc: &DescriptorVector, rules: &DrugLikenessRules) -> f64 {
    rules.score(desc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{descriptors, mol_from_smiles};

    fn dl(s: &str) -> f64 {
        drug_likeness(&descriptors(&mol_from_smiles(s).unwrap()).unwrap(), DrugLikenessRules::shipped())
    }

    #[test]
    fn shipped_values() {
        assert_eq!(DrugLikenessRules::shipped().rules().len(), 8);
        assert_eq!(dl("C"), 0.875);
        assert_eq!(dl("CC(=O)Nc1ccc(O)cc1"), 1.0);
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(DrugLikenessRules::parse("# none"), Err(ScoringError::EmptyRules(_))));
        assert!(DrugLikenessRules::parse("a\tbogus\t-\t1").is_err());
    }
}
