//! Novelty against a set of known compounds: 1 minus the nearest similarity.

use crate::molgraph::{similarity, Fingerprint, Metric};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReferenceIndex {
    fps: Vec<Fingerprint>,
    metric: Metric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoveltyScore {
    pub score: f64,
    /// Set when the reference index is empty and the score defaulted to 1.
    pub empty_reference: bool,
}

impl ReferenceIndex {
    pub fn new(fps: Vec<Fingerprint>, metric: Metric) -> ReferenceIndex {
        ReferenceIndex { fps, metric }
    }

    pub fn len(&self) -> usize {
        self.fps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fps.is_empty()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Highest similarity to any reference; 0 for an empty index.
    /// Mismatched widths count as dissimilar.
    pub fn max_similarity(&self, fp: &Fingerprint) -> f64 {
        self.fps.iter().map(|r| similarity(fp, r, self.metric).unwrap_or(0.0)).fold(0.0, f64::max)
    }

    pub fn novelty(&self, fp: &Fingerprint) -> NoveltyScore {
        if self.fps.is_empty() {
            log::debug!("novelty requested against an empty reference set");
            return NoveltyScore { score: 1.0, empty_reference: true };
        }
        NoveltyScore { score: (1.0 - self.max_similarity(fp)).clamp(0.0, 1.0), empty_reference: false }
    }
}

pub fn novelty(fp: &Fingerprint, reference: &ReferenceIndex) -> NoveltyScore {
    reference.novelty(fp)
}
