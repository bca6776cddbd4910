//! Ranking by a weighted key list over report fields.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::scoring::{ScoreReport, ScoringError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankKey {
    pub key: String,
    pub weight: f64,
}

/// Weighted sum of the named fields; absent fields count as 0.
pub fn rank_score(report: &ScoreReport, spec: &[RankKey]) -> Result<f64, ScoringError> {
    let mut total = 0.0;
    for k in spec {
        total += k.weight * report.field(&k.key)?.unwrap_or(0.0);
    }
    Ok(total)
}

/// Indices of `reports` in rank order: passing candidates by descending
/// score, then hard failures; ties broken by canonical SMILES.
pub fn rank(reports: &[ScoreReport], spec: &[RankKey]) -> Result<Vec<usize>, ScoringError> {
    let scores: Vec<f64> = reports.iter().map(|r| rank_score(r, spec)).collect::<Result<_, _>>()?;
    let mut order: Vec<usize> = (0..reports.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&reports[a], &reports[b]);
        ra.hard_fail
            .cmp(&rb.hard_fail)
            .then_with(|| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal))
            .then_with(|| ra.canonical_smiles.cmp(&rb.canonical_smiles))
    });
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(smiles: &str, reward: f64, hard_fail: bool) -> ScoreReport {
        ScoreReport { canonical_smiles: smiles.into(), reward, hard_fail, valid: true, ..ScoreReport::default() }
    }

    fn by_reward() -> Vec<RankKey> {
        vec![RankKey { key: "reward".into(), weight: 1.0 }]
    }

    #[test]
    fn reward_order_and_ties() {
        let r = vec![report("CCO", 0.5, false), report("CCN", 0.9, false), report("CC", 0.5, false), report("C", 0.0, true)];
        assert_eq!(rank(&r, &by_reward()).unwrap(), vec![1, 2, 0, 3]);
    }

    #[test]
    fn hard_fail_last_even_with_high_score() {
        let mut bad = report("CCCC", 0.0, true);
        bad.mce18 = Some(500.0);
        let r = vec![bad, report("CC", 0.1, false)];
        let spec = vec![RankKey { key: "mce18".into(), weight: 1.0 }];
        assert_eq!(rank(&r, &spec).unwrap(), vec![1, 0]);
    }

    #[test]
    fn scaling_weights_keeps_order() {
        let mut r = Vec::new();
        for (i, s) in ["C", "CC", "CCC", "CCCC", "CCCCC"].iter().enumerate() {
            let mut x = report(s, (i as f64 * 0.37) % 1.0, false);
            x.rersa = Some(1.0 + i as f64);
            r.push(x);
        }
        let spec = vec![RankKey { key: "reward".into(), weight: 2.0 }, RankKey { key: "rersa".into(), weight: -0.25 }];
        let scaled: Vec<RankKey> = spec.iter().map(|k| RankKey { key: k.key.clone(), weight: k.weight * 8.0 }).collect();
        assert_eq!(rank(&r, &spec).unwrap(), rank(&r, &scaled).unwrap());
    }

    #[test]
    fn unknown_key_errors() {
        let spec = vec![RankKey { key: "nope".into(), weight: 1.0 }];
        assert!(rank(&[report("C", 0.0, false)], &spec).is_err());
    }
}
