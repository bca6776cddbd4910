//! Kohonen self-organizing map classifier with per-neuron ZOOM refinement.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::error::ScoringError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SomConfig {
    pub width: usize,
    pub height: usize,
    pub epochs: usize,
    pub learning_rate_start: f64,
    pub learning_rate_end: f64,
    /// Final neighbourhood radius; the initial one is `max(width, height) / 2`.
    pub radius_end: f64,
}

impl Default for SomConfig {
    fn default() -> Self {
        SomConfig { width: 100, height: 100, epochs: 10, learning_rate_start: 0.5, learning_rate_end: 0.01, radius_end: 1.0 }
    }
}

/// Largest ZOOM map side.
pub const MAX_ZOOM_SIDE: usize = 20;
/// Neurons with fewer training hits are never refined.
pub const MIN_ZOOM_HITS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomGrid {
    pub width: usize,
    pub height: usize,
    pub dim: usize,
    /// Neuron `y * width + x` occupies `codebook[k * dim..(k + 1) * dim]`.
    pub codebook: Vec<f64>,
    /// Class names; histogram slot `c` counts class `labels[c]`.
    pub labels: Vec<String>,
    pub histograms: Vec<Vec<u32>>,
    pub children: BTreeMap<usize, SomGrid>,
    /// Confidence below which a neuron with a child delegates to it.
    pub zoom_threshold: f64,
    pub trained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomClass {
    /// `None` when the deciding neuron never saw a training vector.
    pub label: Option<String>,
    pub confidence: f64,
    /// Number of ZOOM levels consulted below the top grid.
    pub depth: usize,
}

fn check_dims(vectors: &[Vec<f64>]) -> Result<usize, ScoringError> {
    let dim = vectors.first().ok_or(ScoringError::EmptyInput)?.len();
    if dim == 0 {
        return Err(ScoringError::EmptyInput);
    }
    for v in vectors {
        if v.len() != dim {
            return Err(ScoringError::DimensionMismatch { expected: dim, found: v.len() });
        }
    }
    Ok(dim)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl SomGrid {
    /// Untrained grid with neurons drawn uniformly from the data's bounding box.
    pub fn initial<R: Rng + ?Sized>(vectors: &[Vec<f64>], width: usize, height: usize, rng: &mut R) -> Result<SomGrid, ScoringError> {
        let dim = check_dims(vectors)?;
        if width == 0 || height == 0 {
            return Err(ScoringError::EmptyInput);
        }
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for v in vectors {
            for d in 0..dim {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        let mut codebook = Vec::with_capacity(width * height * dim);
        for _ in 0..width * height {
            for d in 0..dim {
                codebook.push(lo[d] + rng.gen::<f64>() * (hi[d] - lo[d]));
            }
        }
        Ok(SomGrid {
            width,
            height,
            dim,
            codebook,
            labels: Vec::new(),
            histograms: vec![Vec::new(); width * height],
            children: BTreeMap::new(),
            zoom_threshold: 0.0,
            trained: false,
        })
    }

    pub fn neurons(&self) -> usize {
        self.width * self.height
    }

    pub fn weights(&self, k: usize) -> &[f64] {
        &self.codebook[k * self.dim..(k + 1) * self.dim]
    }

    /// Best-matching unit: nearest neuron, lowest index on ties.
    pub fn bmu(&self, v: &[f64]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for k in 0..self.neurons() {
            let d = sq_dist(self.weights(k), v);
            if d < best.0 {
                best = (d, k);
            }
        }
        best.1
    }

    /// Mean Euclidean distance from each vector to its best-matching unit.
    pub fn quantization_error(&self, vectors: &[Vec<f64>]) -> f64 {
        if vectors.is_empty() {
            return 0.0;
        }
        vectors.iter().map(|v| sq_dist(self.weights(self.bmu(v)), v).sqrt()).sum::<f64>() / vectors.len() as f64
    }

    fn train<R: Rng + ?Sized>(&mut self, vectors: &[Vec<f64>], cfg: &SomConfig, rng: &mut R) {
        let total = (cfg.epochs * vectors.len()).max(1);
        let r0 = (self.width.max(self.height) as f64 / 2.0).max(cfg.radius_end).max(1e-9);
        let r1 = cfg.radius_end.max(1e-9);
        let mut order: Vec<usize> = (0..vectors.len()).collect();
        let mut t = 0usize;
        for _ in 0..cfg.epochs {
            order.shuffle(rng);
            for &i in &order {
                let frac = if total > 1 { t as f64 / (total - 1) as f64 } else { 1.0 };
                let radius = r0 * (r1 / r0).powf(frac);
                let lr = cfg.learning_rate_start + (cfg.learning_rate_end - cfg.learning_rate_start) * frac;
                let v = &vectors[i];
                let b = self.bmu(v);
                let (bx, by) = ((b % self.width) as f64, (b / self.width) as f64);
                let reach = (3.0 * radius).ceil() as i64;
                let two_r2 = 2.0 * radius * radius;
                let (x0, x1) = ((bx as i64 - reach).max(0), (bx as i64 + reach).min(self.width as i64 - 1));
                let (y0, y1) = ((by as i64 - reach).max(0), (by as i64 + reach).min(self.height as i64 - 1));
                for y in y0..=y1 {
                    for x in x0..=x1 {
                        let d2 = (x as f64 - bx).powi(2) + (y as f64 - by).powi(2);
                        let h = (-d2 / two_r2).exp();
                        let k = y as usize * self.width + x as usize;
                        let w = &mut self.codebook[k * self.dim..(k + 1) * self.dim];
                        for d in 0..self.dim {
                            w[d] += lr * h * (v[d] - w[d]);
                        }
                    }
                }
                t += 1;
            }
        }
    }

    fn accumulate(&mut self, vectors: &[Vec<f64>], labels: &[String]) {
        let mut names: Vec<String> = labels.to_vec();
        names.sort();
        names.dedup();
        self.histograms = vec![vec![0; names.len()]; self.neurons()];
        for (v, l) in vectors.iter().zip(labels) {
            let c = names.binary_search(l).expect("label collected above");
            let k = self.bmu(v);
            self.histograms[k][c] += 1;
        }
        self.labels = names;
        self.trained = true;
    }

    /// Majority class index and fraction at neuron `k`.
    pub fn majority(&self, k: usize) -> Option<(usize, f64)> {
        let h = self.histograms.get(k)?;
        let total: u32 = h.iter().sum();
        if total == 0 {
            return None;
        }
        let mut best = 0;
        for c in 1..h.len() {
            if h[c] > h[best] {
                best = c;
            }
        }
        Some((best, h[best] as f64 / total as f64))
    }

    pub fn hits(&self, k: usize) -> u32 {
        self.histograms.get(k).map_or(0, |h| h.iter().sum())
    }
}

/// Trains a grid from a random codebook and accumulates per-neuron label histograms.
pub fn som_train<R: Rng + ?Sized>(vectors: &[Vec<f64>], labels: &[String], cfg: &SomConfig, rng: &mut R) -> Result<SomGrid, ScoringError> {
    if vectors.len() != labels.len() {
        return Err(ScoringError::LabelMismatch { vectors: vectors.len(), labels: labels.len() });
    }
    let mut grid = SomGrid::initial(vectors, cfg.width, cfg.height, rng)?;
    grid.train(vectors, cfg, rng);
    grid.accumulate(vectors, labels);
    Ok(grid)
}

pub fn som_classify(grid: &SomGrid, v: &[f64]) -> Result<SomClass, ScoringError> {
    if !grid.trained {
        return Err(ScoringError::UntrainedGrid);
    }
    if v.len() != grid.dim {
        return Err(ScoringError::DimensionMismatch { expected: grid.dim, found: v.len() });
    }
    let k = grid.bmu(v);
    let verdict = grid.majority(k);
    let confidence = verdict.map_or(0.0, |(_, f)| f);
    if let Some(child) = grid.children.get(&k) {
        if confidence < grid.zoom_threshold {
            let mut c = som_classify(child, v)?;
            c.depth += 1;
            return Ok(c);
        }
    }
    Ok(match verdict {
        Some((c, f)) => SomClass { label: Some(grid.labels[c].clone()), confidence: f, depth: 0 },
        None => SomClass { label: None, confidence: 0.0, depth: 0 },
    })
}

/// ZOOM map side for a neuron holding `m` training vectors.
pub fn zoom_side(m: usize) -> usize {
    ((5.0 * m as f64).sqrt().ceil() as usize).clamp(1, MAX_ZOOM_SIDE)
}

/// Gives every weakly classifying neuron (majority fraction below
/// `threshold`, at least [`MIN_ZOOM_HITS`] hits) a child map trained on the
/// vectors it captures.
pub fn zoom_refine<R: Rng + ?Sized>(
    grid: &SomGrid,
    vectors: &[Vec<f64>],
    labels: &[String],
    threshold: f64,
    cfg: &SomConfig,
    rng: &mut R,
) -> Result<SomGrid, ScoringError> {
    if !grid.trained {
        return Err(ScoringError::UntrainedGrid);
    }
    if vectors.len() != labels.len() {
        return Err(ScoringError::LabelMismatch { vectors: vectors.len(), labels: labels.len() });
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != grid.dim {
            return Err(ScoringError::DimensionMismatch { expected: grid.dim, found: v.len() });
        }
        members.entry(grid.bmu(v)).or_default().push(i);
    }
    let mut out = grid.clone();
    out.zoom_threshold = threshold;
    out.children.clear();
    for (k, idx) in members {
        let weak = grid.majority(k).is_some_and(|(_, f)| f < threshold);
        if !weak || idx.len() < MIN_ZOOM_HITS {
            continue;
        }
        let side = zoom_side(idx.len());
        let sub_v: Vec<Vec<f64>> = idx.iter().map(|&i| vectors[i].clone()).collect();
        let sub_l: Vec<String> = idx.iter().map(|&i| labels[i].clone()).collect();
        let child_cfg = SomConfig { width: side, height: side, ..cfg.clone() };
        out.children.insert(k, som_train(&sub_v, &sub_l, &child_cfg, rng)?);
    }
    Ok(out)
}

/// Per-dimension standardisation fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    pub fn fit(vectors: &[Vec<f64>]) -> Result<Scaler, ScoringError> {
        let dim = check_dims(vectors)?;
        let n = vectors.len() as f64;
        let mut mean = vec![0.0; dim];
        for v in vectors {
            for d in 0..dim {
                mean[d] += v[d] / n;
            }
        }
        let mut scale = vec![0.0; dim];
        for v in vectors {
            for d in 0..dim {
                scale[d] += (v[d] - mean[d]).powi(2) / n;
            }
        }
        let scale = scale.into_iter().map(|s| if s > 1e-12 { s.sqrt() } else { 1.0 }).collect();
        Ok(Scaler { mean, scale })
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.mean).zip(&self.scale).map(|((x, m), s)| (x - m) / s).collect()
    }
}
