//! Medicinal-chemistry filters: substructure alerts with hard/soft severity.

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use super::error::ScoringError;
use crate::data;
use crate::molgraph::smarts::Target;
use crate::molgraph::{Molecule, Pattern, RuleError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Hard,
    Soft,
}

#[derive(Debug, Clone)]
pub struct McfRule {
    pub id: String,
    pub severity: Severity,
    pub pattern: Pattern,
    pub description: String,
}

#[derive(Debug, Clone)]
pub struct McfRuleSet {
    rules: Vec<McfRule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct McfVerdict {
    pub pass: bool,
    pub hard_hits: Vec<String>,
    pub soft_hits: Vec<String>,
}

static SHIPPED: Lazy<McfRuleSet> =
    Lazy::new(|| McfRuleSet::parse(&data::table(data::MCF)).expect("shipped filter table must compile"));

impl McfRuleSet {
    /// Parses `id <TAB> severity <TAB> pattern <TAB> description` lines.
    pub fn parse(text: &str) -> Result<McfRuleSet, ScoringError> {
        let mut rules: Vec<McfRule> = Vec::new();
        for (line_no, line) in data::lines(text) {
            let err = |m: String| RuleError::new(data::MCF, line_no, m);
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() < 3 {
                return Err(err(format!("expected at least 3 tab-separated fields, found {}", fields.len())).into());
            }
            let severity = match fields[1].to_ascii_lowercase().as_str() {
                "hard" => Severity::Hard,
                "soft" => Severity::Soft,
                other => return Err(err(format!("unknown severity {other:?}")).into()),
            };
            if rules.iter().any(|r| r.id == fields[0]) {
                return Err(err(format!("duplicate rule id {}", fields[0])).into());
            }
            let pattern = Pattern::parse(fields[2]).map_err(|e| err(e.to_string()))?;
            rules.push(McfRule {
                id: fields[0].to_string(),
                severity,
                pattern,
                description: fields.get(3).copied().unwrap_or("").to_string(),
            });
        }
        if rules.is_empty() {
            return Err(ScoringError::EmptyRules(data::MCF.into()));
        }
        Ok(McfRuleSet { rules })
    }

    pub fn shipped() -> &'static McfRuleSet {
        &SHIPPED
    }

    pub fn rules(&self) -> &[McfRule] {
        &self.rules
    }

    /// Fails iff a hard rule matches; soft hits are reported alongside.
    pub fn screen(&self, mol: &Molecule) -> McfVerdict {
        let target = Target::new(mol);
        let mut v = McfVerdict::default();
        for r in &self.rules {
            if r.pattern.find_in(&target, None, 1).is_empty() {
                continue;
            }
            match r.severity {
                Severity::Hard => v.hard_hits.push(r.id.clone()),
                Severity::Soft => v.soft_hits.push(r.id.clone()),
            }
        }
        v.pass = v.hard_hits.is_empty();
        v
    }
}

pub fn mcf_screen(mol: &Molecule, rules: &McfRuleSet) -> McfVerdict {
    rules.screen(mol)
}
