//! Per-candidate score reports and the scoring context that fills them.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use super::druglike::DrugLikenessRules;
use super::error::ScoringError;
use super::mcf::{McfRuleSet, McfVerdict};
use super::mce18::mce18;
use super::novelty::ReferenceIndex;
use super::privileged::{pf_score, PfSet};
use super::rersa::{rersa, FragmentStats, RersaConfig};
use super::reward::{reward, RewardWeights};
use super::ro5::{ro5, Ro5Result};
use super::som::{som_classify, Scaler, SomClass, SomGrid};
use super::tindex::{t_index_counts, TIndexConfig, TIndexResult};
use super::flex::flex;
use crate::data;
use crate::molgraph::smi::read_smi;
use crate::molgraph::{canonical_smiles, descriptors, fingerprint, mol_from_smiles, DescriptorVector, Element, Molecule};

/// Individually selectable scoring modules, in report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Module {
    Mcf,
    TIndex,
    Descriptors,
    Ro5,
    Mce18,
    DrugLikeness,
    Rersa,
    Novelty,
    Similarity,
    Privileged,
    Flex,
    Som,
}

impl Module {
    pub const ALL: [Module; 12] = [
        Module::Mcf,
        Module::TIndex,
        Module::Descriptors,
        Module::Ro5,
        Module::Mce18,
        Module::DrugLikeness,
        Module::Rersa,
        Module::Novelty,
        Module::Similarity,
        Module::Privileged,
        Module::Flex,
        Module::Som,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Module::Mcf => "mcf",
            Module::TIndex => "t_index",
            Module::Descriptors => "descriptors",
            Module::Ro5 => "ro5",
            Module::Mce18 => "mce18",
            Module::DrugLikeness => "drug_likeness",
            Module::Rersa => "rersa",
            Module::Novelty => "novelty",
            Module::Similarity => "similarity",
            Module::Privileged => "pf_score",
            Module::Flex => "flex",
            Module::Som => "som",
        }
    }

    /// CSV columns contributed by this module.
    pub fn columns(self) -> Vec<&'static str> {
        match self {
            Module::Mcf => vec!["mcf", "mcf_hits"],
            Module::TIndex => vec!["t_index", "t_index_ratio"],
            Module::Descriptors => DescriptorVector::NAMES.to_vec(),
            Module::Ro5 => vec!["ro5_violations", "ro5"],
            Module::Mce18 => vec!["mce18"],
            Module::DrugLikeness => vec!["drug_likeness"],
            Module::Rersa => vec!["rersa"],
            Module::Novelty => vec!["novelty"],
            Module::Similarity => vec!["similarity_to_reference"],
            Module::Privileged => vec!["pf_score"],
            Module::Flex => vec!["flex"],
            Module::Som => vec!["som_label", "som_confidence"],
        }
    }
}

impl FromStr for Module {
    type Err = ScoringError;
    fn from_str(s: &str) -> Result<Module, ScoringError> {
        let s = s.trim().to_ascii_lowercase();
        Module::ALL
            .into_iter()
            .find(|m| m.name() == s || (s == "privileged" && *m == Module::Privileged) || (s == "tindex" && *m == Module::TIndex))
            .ok_or_else(|| ScoringError::Parse(format!("unknown module {s:?}")))
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses `all` or a comma-separated module list into a sorted set.
pub fn parse_modules(spec: &str) -> Result<BTreeSet<Module>, ScoringError> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(Module::ALL.into_iter().collect());
    }
    let set: BTreeSet<Module> = spec.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect::<Result<_, _>>()?;
    if set.is_empty() {
        return Err(ScoringError::Parse("module list is empty".into()));
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreReport {
    /// Canonical SMILES, or the input text when it could not be parsed.
    pub canonical_smiles: String,
    pub valid: bool,
    /// Name of the gate that zeroed the reward, if any.
    pub gate: Option<String>,
    pub hard_fail: bool,
    pub mcf: Option<McfVerdict>,
    pub t_index: Option<TIndexResult>,
    pub descriptors: Option<DescriptorVector>,
    pub ro5: Option<Ro5Result>,
    pub mce18: Option<f64>,
    pub drug_likeness: Option<f64>,
    pub rersa: Option<f64>,
    pub novelty: Option<f64>,
    pub similarity_to_reference: Option<f64>,
    pub pf_score: Option<f64>,
    pub flex: Option<f64>,
    pub som_class: Option<SomClass>,
    pub reward: f64,
    pub warnings: Vec<String>,
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl ScoreReport {
    pub fn invalid(input: &str, reason: &str) -> ScoreReport {
        ScoreReport {
            canonical_smiles: input.to_string(),
            gate: Some("invalid".into()),
            hard_fail: true,
            warnings: vec![reason.to_string()],
            ..ScoreReport::default()
        }
    }

    /// Numeric value of a named field for ranking; `Ok(None)` when absent.
    pub fn field(&self, name: &str) -> Result<Option<f64>, ScoringError> {
        let b = |x: bool| if x { 1.0 } else { 0.0 };
        Ok(match name {
            "reward" => Some(self.reward),
            "mce18" => self.mce18,
            "drug_likeness" => self.drug_likeness,
            "rersa" => self.rersa,
            "novelty" => self.novelty,
            "similarity_to_reference" | "similarity" => self.similarity_to_reference,
            "pf_score" => self.pf_score,
            "flex" => self.flex,
            "mcf" => self.mcf.as_ref().map(|v| b(v.pass)),
            "t_index" => self.t_index.map(|t| b(t.pass)),
            "t_index_ratio" => self.t_index.map(|t| t.ratio),
            "ro5" => self.ro5.map(|r| b(r.pass)),
            "ro5_violations" => self.ro5.map(|r| r.violations as f64),
            "som_confidence" => self.som_class.as_ref().map(|s| s.confidence),
            other => match DescriptorVector::default().get(other) {
                Some(_) => self.descriptors.as_ref().and_then(|d| d.get(other)),
                None => return Err(ScoringError::UnknownField(other.to_string())),
            },
        })
    }

    /// Leading CSV columns present in every score table.
    pub const BASE_COLUMNS: [&'static str; 4] = ["smiles", "valid", "gate", "hard_fail"];

    pub fn base_values(&self) -> Vec<String> {
        vec![
            self.canonical_smiles.clone(),
            self.valid.to_string(),
            self.gate.clone().unwrap_or_default(),
            self.hard_fail.to_string(),
        ]
    }

    /// CSV cells for one module, blank where the module did not run.
    pub fn module_values(&self, module: Module) -> Vec<String> {
        let verdict = |x: bool| if x { "pass" } else { "fail" }.to_string();
        match module {
            Module::Mcf => match &self.mcf {
                Some(v) => {
                    let hits: Vec<&str> = v.hard_hits.iter().chain(&v.soft_hits).map(String::as_str).collect();
                    vec![verdict(v.pass), hits.join(";")]
                }
                None => vec![String::new(); 2],
            },
            Module::TIndex => match self.t_index {
                Some(t) => vec![verdict(t.pass), num(t.ratio)],
                None => vec![String::new(); 2],
            },
            Module::Descriptors => match &self.descriptors {
                Some(d) => DescriptorVector::NAMES
                    .iter()
                    .map(|n| {
                        let v = d.get(n).expect("descriptor name");
                        if v.fract() == 0.0 && !matches!(*n, "mw" | "fraction_sp3" | "logp_est" | "tpsa_est") {
                            format!("{}", v as i64)
                        } else {
                            num(v)
                        }
                    })
                    .collect(),
                None => vec![String::new(); DescriptorVector::NAMES.len()],
            },
            Module::Ro5 => match self.ro5 {
                Some(r) => vec![r.violations.to_string(), verdict(r.pass)],
                None => vec![String::new(); 2],
            },
            Module::Mce18 => vec![opt(self.mce18)],
            Module::DrugLikeness => vec![opt(self.drug_likeness)],
            Module::Rersa => vec![opt(self.rersa)],
            Module::Novelty => vec![opt(self.novelty)],
            Module::Similarity => vec![opt(self.similarity_to_reference)],
            Module::Privileged => vec![opt(self.pf_score)],
            Module::Flex => vec![opt(self.flex)],
            Module::Som => match &self.som_class {
                Some(s) => vec![s.label.clone().unwrap_or_default(), num(s.confidence)],
                None => vec![String::new(); 2],
            },
        }
    }

    pub fn reward_value(&self) -> String {
        num(self.reward)
    }
}

/// A trained SOM together with the scaler applied to descriptor vectors.
#[derive(Debug, Clone)]
pub struct SomModel {
    pub grid: SomGrid,
    pub scaler: Scaler,
}

static SHIPPED_STATS: Lazy<FragmentStats> = Lazy::new(|| {
    let mols: Vec<Molecule> = read_smi(&data::table(data::CORPUS)).iter().filter_map(|r| r.parse().ok()).collect();
    FragmentStats::from_molecules(&mols)
});

/// Fragment statistics of the shipped corpus.
pub fn shipped_fragment_stats() -> &'static FragmentStats {
    &SHIPPED_STATS
}

/// Everything needed to score a candidate. Built once, then shared read-only.
#[derive(Debug, Clone)]
pub struct ScoringContext {
    pub mcf: McfRuleSet,
    pub drug_rules: DrugLikenessRules,
    pub t_index: TIndexConfig,
    pub rersa: RersaConfig,
    pub fragment_stats: FragmentStats,
    /// Known compounds for novelty.
    pub known: ReferenceIndex,
    /// Reference ligands for similarity (usually cosine).
    pub ligands: ReferenceIndex,
    pub privileged: Option<PfSet>,
    pub som: Option<SomModel>,
    pub weights: RewardWeights,
}

impl ScoringContext {
    /// Shipped rules, shipped corpus statistics, empty references.
    pub fn new(weights: RewardWeights) -> Result<ScoringContext, ScoringError> {
        weights.validate()?;
        Ok(ScoringContext {
            mcf: McfRuleSet::shipped().clone(),
            drug_rules: DrugLikenessRules::shipped().clone(),
            t_index: TIndexConfig::default(),
            rersa: RersaConfig::default(),
            fragment_stats: shipped_fragment_stats().clone(),
            known: ReferenceIndex::default(),
            ligands: ReferenceIndex::default(),
            privileged: None,
            som: None,
            weights,
        })
    }

    pub fn score_smiles(&self, smiles: &str) -> ScoreReport {
        match mol_from_smiles(smiles) {
            Ok(mol) => self.score(&mol),
            Err(e) => ScoreReport::invalid(smiles, &e.to_string()),
        }
    }

    /// Cascade: MCF, T-index, descriptors (RO5 gate), then the remaining
    /// scores. A gated candidate keeps only the fields computed so far.
    pub fn score(&self, mol: &Molecule) -> ScoreReport {
        let mut r = match self.start(mol) {
            Ok(r) => r,
            Err(r) => return *r,
        };
        let gates = self.weights.gates;
        let verdict = self.mcf.screen(mol);
        let mcf_fail = !verdict.pass;
        r.mcf = Some(verdict);
        if gates.mcf && mcf_fail {
            return gated(r, "mcf");
        }
        let heavy = (0..mol.atom_count()).filter(|&i| mol.atom(i).is_heavy()).count();
        let carbons = (0..mol.atom_count()).filter(|&i| mol.atom(i).is_heavy() && mol.atom(i).element == Element::C).count();
        let ti = t_index_counts(heavy, heavy - carbons, &self.t_index);
        r.t_index = Some(ti);
        if gates.t_index && !ti.pass {
            return gated(r, "t_index");
        }
        let desc = match descriptors(mol) {
            Ok(d) => d,
            Err(e) => return gated(with_warning(r, e.to_string()), "invalid"),
        };
        let ro = ro5(&desc);
        r.ro5 = Some(ro);
        r.descriptors = Some(desc);
        if gates.ro5 && !ro.pass {
            return gated(r, "ro5");
        }
        self.fill_rest(mol, &mut r);
        r.reward = reward(&r, &self.weights);
        r
    }

    /// Evaluates every module regardless of gates, then applies the gates.
    pub fn score_full(&self, mol: &Molecule) -> ScoreReport {
        let mut r = match self.start(mol) {
            Ok(r) => r,
            Err(r) => return *r,
        };
        let desc = match descriptors(mol) {
            Ok(d) => d,
            Err(e) => return gated(with_warning(r, e.to_string()), "invalid"),
        };
        r.mcf = Some(self.mcf.screen(mol));
        r.t_index = Some(super::tindex::t_index(&desc, &self.t_index));
        r.ro5 = Some(ro5(&desc));
        r.descriptors = Some(desc);
        self.fill_rest(mol, &mut r);
        let gates = self.weights.gates;
        let gate = if gates.mcf && !r.mcf.as_ref().is_some_and(|v| v.pass) {
            Some("mcf")
        } else if gates.t_index && !r.t_index.is_some_and(|t| t.pass) {
            Some("t_index")
        } else if gates.ro5 && !r.ro5.is_some_and(|x| x.pass) {
            Some("ro5")
        } else {
            None
        };
        match gate {
            Some(g) => {
                r.gate = Some(g.into());
                r.hard_fail = true;
                r.reward = 0.0;
            }
            None => r.reward = reward(&r, &self.weights),
        }
        r
    }

    pub fn score_full_smiles(&self, smiles: &str) -> ScoreReport {
        match mol_from_smiles(smiles) {
            Ok(mol) => self.score_full(&mol),
            Err(e) => ScoreReport::invalid(smiles, &e.to_string()),
        }
    }

    fn start(&self, mol: &Molecule) -> Result<ScoreReport, Box<ScoreReport>> {
        if !mol.is_sanitized() || mol.is_empty() {
            return Err(Box::new(ScoreReport::invalid(&canonical_smiles(mol), "molecule is empty or not sanitized")));
        }
        Ok(ScoreReport { canonical_smiles: canonical_smiles(mol), valid: true, ..ScoreReport::default() })
    }

    fn fill_rest(&self, mol: &Molecule, r: &mut ScoreReport) {
        let desc = r.descriptors.clone().expect("descriptors computed before the remaining scores");
        r.mce18 = Some(mce18(mol));
        r.drug_likeness = Some(self.drug_rules.score(&desc));
        r.flex = Some(flex(&desc));
        match rersa(mol, &self.fragment_stats, &self.rersa) {
            Ok(s) => r.rersa = Some(s),
            Err(e) => r.warnings.push(format!("rersa: {e}")),
        }
        let fp = fingerprint(mol);
        let nov = self.known.novelty(&fp);
        if nov.empty_reference {
            r.warnings.push("novelty: empty reference set".into());
        }
        r.novelty = Some(nov.score);
        if !self.ligands.is_empty() {
            r.similarity_to_reference = Some(self.ligands.max_similarity(&fp).clamp(0.0, 1.0));
        }
        if let Some(pfs) = &self.privileged {
            let p = pf_score(mol, pfs);
            if p.empty_set {
                r.warnings.push("pf_score: empty fragment set".into());
            }
            r.pf_score = Some(p.score);
        }
        if let Some(som) = &self.som {
            match som_classify(&som.grid, &som.scaler.apply(&desc.to_vec())) {
                Ok(c) => r.som_class = Some(c),
                Err(e) => r.warnings.push(format!("som: {e}")),
            }
        }
    }
}

fn gated(mut r: ScoreReport, gate: &str) -> ScoreReport {
    r.gate = Some(gate.to_string());
    r.hard_fail = true;
    r.reward = 0.0;
    r
}

fn with_warning(mut r: ScoreReport, w: String) -> ScoreReport {
    r.warnings.push(w);
    r
}
