//! Butina leader clustering on Tanimoto distance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::molgraph::{tanimoto, Fingerprint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Member indices per cluster, leader first, remaining members ascending.
    pub clusters: Vec<Vec<usize>>,
    /// Cluster id of every input.
    pub assignment: Vec<usize>,
    pub n_chemotypes: usize,
    /// Mean pairwise similarity inside clusters with at least two members.
    pub mean_intra_similarity: Option<f64>,
}

fn sim(a: &Fingerprint, b: &Fingerprint) -> f64 {
    tanimoto(a, b).unwrap_or(0.0)
}

/// Indices within `threshold` Tanimoto distance of each fingerprint (itself excluded).
pub fn neighbor_lists(fps: &[Fingerprint], threshold: f64) -> Vec<Vec<usize>> {
    (0..fps.len())
        .into_par_iter()
        .map(|i| (0..fps.len()).filter(|&j| j != i && 1.0 - sim(&fps[i], &fps[j]) <= threshold).collect())
        .collect()
}

pub fn butina(fps: &[Fingerprint], threshold: f64) -> Clustering {
    let nbrs = neighbor_lists(fps, threshold);
    let mut order: Vec<usize> = (0..fps.len()).collect();
    // Most neighbours first; lower index wins ties.
    order.sort_by(|&a, &b| nbrs[b].len().cmp(&nbrs[a].len()).then(a.cmp(&b)));
    let mut assignment = vec![usize::MAX; fps.len()];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for leader in order {
        if assignment[leader] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        assignment[leader] = id;
        let mut members = vec![leader];
        for &j in &nbrs[leader] {
            if assignment[j] == usize::MAX {
                assignment[j] = id;
                members.push(j);
            }
        }
        clusters.push(members);
    }
    let mut sums = (0.0, 0usize);
    for c in clusters.iter().filter(|c| c.len() > 1) {
        let mut s = 0.0;
        let mut n = 0usize;
        for (k, &a) in c.iter().enumerate() {
            for &b in &c[k + 1..] {
                s += sim(&fps[a], &fps[b]);
                n += 1;
            }
        }
        sums.0 += s / n as f64;
        sums.1 += 1;
    }
    Clustering {
        n_chemotypes: clusters.len(),
        clusters,
        assignment,
        mean_intra_similarity: (sums.1 > 0).then(|| sums.0 / sums.1 as f64),
    }
}
