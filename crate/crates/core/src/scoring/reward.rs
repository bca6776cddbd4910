//! Composite reward: hard gates, then a weighted mean of component scores.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::error::ScoringError;
use super::report::ScoreReport;
use crate::molgraph::DescriptorVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    DrugLikeness,
    /// Mean desirability over the configured descriptor ranges.
    Properties,
    /// Ease of synthesis, `(10 - rersa) / 9`.
    Synthesis,
    Novelty,
    Similarity,
    Privileged,
    /// `1 - flex`.
    Rigidity,
    Mce18,
    /// `1 - violations / 4`.
    Ro5,
    /// Confidence of the target-class SOM verdict, 0 for any other class.
    Som,
}

impl Component {
    pub const ALL: [Component; 10] = [
        Component::DrugLikeness,
        Component::Properties,
        Component::Synthesis,
        Component::Novelty,
        Component::Similarity,
        Component::Privileged,
        Component::Rigidity,
        Component::Mce18,
        Component::Ro5,
        Component::Som,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Component::DrugLikeness => "drug_likeness",
            Component::Properties => "properties",
            Component::Synthesis => "synthesis",
            Component::Novelty => "novelty",
            Component::Similarity => "similarity",
            Component::Privileged => "privileged",
            Component::Rigidity => "rigidity",
            Component::Mce18 => "mce18",
            Component::Ro5 => "ro5",
            Component::Som => "som",
        }
    }
}

/// Inclusive desired interval for one descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    /// 1 inside the interval, falling linearly to 0 at `band` times the
    /// interval width beyond either edge.
    pub fn desirability(&self, value: f64, band: f64) -> f64 {
        if value >= self.min && value <= self.max {
            return 1.0;
        }
        let width = self.max - self.min;
        let reach = band * if width > 0.0 { width } else { self.max.abs().max(self.min.abs()).max(1.0) };
        if reach <= 0.0 {
            return 0.0;
        }
        let outside = if value < self.min { self.min - value } else { value - self.max };
        (1.0 - outside / reach).clamp(0.0, 1.0)
    }
}

/// Which verdicts zero the reward outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Gates {
    pub mcf: bool,
    pub t_index: bool,
    pub ro5: bool,
}

impl Default for Gates {
    fn default() -> Self {
        Gates { mcf: true, t_index: true, ro5: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardWeights {
    pub weights: BTreeMap<Component, f64>,
    pub ranges: BTreeMap<String, Range>,
    /// Decay band for ranges, as a fraction of the range width.
    pub band: f64,
    /// MCE-18 value that maps to a component score of 1.
    pub mce18_cap: f64,
    pub som_target: Option<String>,
    pub gates: Gates,
}

impl Default for RewardWeights {
    fn default() -> Self {
        let weights = BTreeMap::from([
            (Component::DrugLikeness, 1.0),
            (Component::Properties, 1.0),
            (Component::Synthesis, 0.5),
            (Component::Mce18, 0.5),
        ]);
        let ranges = BTreeMap::from([
            ("mw".to_string(), Range { min: 250.0, max: 450.0 }),
            ("logp_est".to_string(), Range { min: 1.0, max: 3.5 }),
            ("tpsa_est".to_string(), Range { min: 40.0, max: 100.0 }),
            ("hbd".to_string(), Range { min: 0.0, max: 2.0 }),
            ("rotatable_bonds".to_string(), Range { min: 1.0, max: 6.0 }),
            ("aromatic_rings".to_string(), Range { min: 1.0, max: 3.0 }),
            ("fraction_sp3".to_string(), Range { min: 0.25, max: 0.6 }),
        ]);
        RewardWeights { weights, ranges, band: 0.25, mce18_cap: 100.0, som_target: None, gates: Gates::default() }
    }
}

impl RewardWeights {
    pub fn only(component: Component) -> RewardWeights {
        RewardWeights { weights: BTreeMap::from([(component, 1.0)]), ..RewardWeights::default() }
    }

    pub fn validate(&self) -> Result<(), ScoringError> {
        let bad = |m: String| Err(ScoringError::InvalidWeights(m));
        for (c, w) in &self.weights {
            if !w.is_finite() || *w < 0.0 {
                return bad(format!("weight for {} must be a finite non-negative number", c.name()));
            }
        }
        if !self.weights.values().any(|w| *w > 0.0) {
            return bad("at least one weight must be positive".into());
        }
        let probe = DescriptorVector::default();
        for (name, r) in &self.ranges {
            if probe.get(name).is_none() {
                return bad(format!("unknown descriptor {name:?} in ranges"));
            }
            if !(r.min.is_finite() && r.max.is_finite()) || r.min > r.max {
                return bad(format!("range for {name} must satisfy min <= max"));
            }
        }
        if !(self.band >= 0.0 && self.band.is_finite()) || !(self.mce18_cap > 0.0 && self.mce18_cap.is_finite()) {
            return bad("band must be >= 0 and mce18_cap > 0".into());
        }
        Ok(())
    }

    /// Mean desirability over the configured ranges; `None` without ranges.
    pub fn properties(&self, desc: &DescriptorVector) -> Option<f64> {
        if self.ranges.is_empty() {
            return None;
        }
        let sum: f64 = self
            .ranges
            .iter()
            .map(|(name, r)| r.desirability(desc.get(name).expect("validated descriptor name"), self.band))
            .sum();
        Some(sum / self.ranges.len() as f64)
    }
}

/// Component scores in [0, 1] available from a report.
pub fn component_scores(report: &ScoreReport, weights: &RewardWeights) -> BTreeMap<Component, f64> {
    let mut out = BTreeMap::new();
    let mut put = |c: Component, v: Option<f64>| {
        if let Some(v) = v {
            out.insert(c, v.clamp(0.0, 1.0));
        }
    };
    put(Component::DrugLikeness, report.drug_likeness);
    put(Component::Properties, report.descriptors.as_ref().and_then(|d| weights.properties(d)));
    put(Component::Synthesis, report.rersa.map(|s| (10.0 - s) / 9.0));
    put(Component::Novelty, report.novelty);
    put(Component::Similarity, report.similarity_to_reference);
    put(Component::Privileged, report.pf_score);
    put(Component::Rigidity, report.flex.map(|f| 1.0 - f));
    put(Component::Mce18, report.mce18.map(|m| m / weights.mce18_cap));
    put(Component::Ro5, report.ro5.map(|r| 1.0 - r.violations as f64 / 4.0));
    put(
        Component::Som,
        report.som_class.as_ref().map(|s| match (&weights.som_target, &s.label) {
            (Some(t), Some(l)) if t == l => s.confidence,
            _ => 0.0,
        }),
    );
    out
}

/// Weighted mean of the available components with positive weight.
pub fn weighted_mean(scores: &BTreeMap<Component, f64>, weights: &RewardWeights) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (c, w) in &weights.weights {
        if *w <= 0.0 {
            continue;
        }
        if let Some(s) = scores.get(c) {
            num += w * s;
            den += w;
        }
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).clamp(0.0, 1.0)
    }
}

/// 0 under any hard gate, otherwise the weighted component mean.
pub fn reward(report: &ScoreReport, weights: &RewardWeights) -> f64 {
    if report.hard_fail {
        return 0.0;
    }
    weighted_mean(&component_scores(report, weights), weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_decay() {
        let r = Range { min: 200.0, max: 400.0 };
        assert_eq!(r.desirability(300.0, 0.25), 1.0);
        assert_eq!(r.desirability(400.0, 0.25), 1.0);
        assert!((r.desirability(425.0, 0.25) - 0.5).abs() < 1e-12);
        assert_eq!(r.desirability(450.0, 0.25), 0.0);
        assert_eq!(r.desirability(100.0, 0.25), 0.0);
    }

    #[test]
    fn all_ones_give_one() {
        let mut scores = BTreeMap::new();
        let mut w = RewardWeights::default();
        for (k, c) in Component::ALL.iter().enumerate() {
            scores.insert(*c, 1.0);
            w.weights.insert(*c, k as f64 + 0.5);
        }
        assert_eq!(weighted_mean(&scores, &w), 1.0);
    }

    #[test]
    fn validation() {
        assert!(RewardWeights::default().validate().is_ok());
        let mut w = RewardWeights::default();
        w.weights.values_mut().for_each(|v| *v = 0.0);
        assert!(w.validate().is_err());
        let mut w = RewardWeights::default();
        w.ranges.insert("bogus".into(), Range { min: 0.0, max: 1.0 });
        assert!(w.validate().is_err());
    }
}
