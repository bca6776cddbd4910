//! Circular (Morgan-style) fingerprints and bit-vector similarity.

use serde::{Deserialize, Serialize};

use super::error::ChemError;
use super::mol::Molecule;

pub const DEFAULT_WIDTH: usize = 2048;
pub const DEFAULT_RADIUS: u32 = 2;

/// splitmix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-dependent combination of a running hash with one more value.
pub fn combine(h: u64, v: u64) -> u64 {
    mix64(h ^ mix64(v).rotate_left(17))
}

pub fn hash_seq(values: &[u64]) -> u64 {
    values.iter().fold(0x6a09_e667_f3bc_c909, |h, &v| combine(h, v))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    words: Vec<u64>,
    width: usize,
    radius: u32,
    popcount: u32,
}

impl Fingerprint {
    pub fn empty(width: usize, radius: u32) -> Result<Fingerprint, ChemError> {
        if width == 0 || !width.is_power_of_two() {
            return Err(ChemError::InvalidWidth(width));
        }
        Ok(Fingerprint { words: vec![0; width.div_ceil(64)], width, radius, popcount: 0 })
    }

    /// Builds a fingerprint from explicit bit positions (taken modulo width).
    pub fn from_bits(width: usize, bits: impl IntoIterator<Item = usize>) -> Result<Fingerprint, ChemError> {
        let mut fp = Fingerprint::empty(width, 0)?;
        for b in bits {
            fp.set(b);
        }
        Ok(fp)
    }

    fn set(&mut self, bit: usize) {
        let bit = bit & (self.width - 1);
        let (w, m) = (bit / 64, 1u64 << (bit % 64));
        if self.words[w] & m == 0 {
            self.words[w] |= m;
            self.popcount += 1;
        }
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.width && self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn popcount(&self) -> u32 {
        self.popcount
    }

    pub fn is_empty(&self) -> bool {
        self.popcount == 0
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(|&b| self.get(b))
    }

    /// Bits as 0.0/1.0 values, for vector-space methods.
    pub fn to_dense(&self) -> Vec<f64> {
        (0..self.width).map(|b| if self.get(b) { 1.0 } else { 0.0 }).collect()
    }

    fn check(&self, other: &Fingerprint) -> Result<(), ChemError> {
        if self.width != other.width {
            Err(ChemError::WidthMismatch(self.width, other.width))
        } else {
            Ok(())
        }
    }

    pub fn intersection_count(&self, other: &Fingerprint) -> Result<u32, ChemError> {
        self.check(other)?;
        Ok(self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Tanimoto,
    Cosine,
}

impl std::str::FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Metric, String> {
        match s.to_ascii_lowercase().as_str() {
            "tanimoto" => Ok(Metric::Tanimoto),
            "cosine" => Ok(Metric::Cosine),
            other => Err(format!("unknown similarity metric {other:?}")),
        }
    }
}

/// Similarity in [0, 1]; 0 when either fingerprint has no bits set.
pub fn similarity(a: &Fingerprint, b: &Fingerprint, metric: Metric) -> Result<f64, ChemError> {
    let both = a.intersection_count(b)? as f64;
    let (na, nb) = (a.popcount as f64, b.popcount as f64);
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok(match metric {
        Metric::Tanimoto => both / (na + nb - both),
        Metric::Cosine => {
            if a.popcount == b.popcount && both == na {
                1.0
            } else {
                (both / (na * nb).sqrt()).min(1.0)
            }
        }
    })
}

pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, ChemError> {
    similarity(a, b, Metric::Tanimoto)
}

fn atom_invariant(mol: &Molecule, i: usize) -> u64 {
    let a = mol.atom(i);
    hash_seq(&[
        a.element.atomic_number() as u64,
        mol.heavy_degree(i) as u64,
        (a.charge as i64) as u64,
        a.implicit_h as u64,
        a.aromatic as u64,
        mol.is_ring_atom(i) as u64,
    ])
}

/// Environment identifiers of every atom at every iteration `0..=radius`.
pub fn environment_hashes(mol: &Molecule, radius: u32) -> Vec<u64> {
    let n = mol.atom_count();
    let mut current: Vec<u64> = (0..n).map(|i| atom_invariant(mol, i)).collect();
    let mut all = current.clone();
    for iteration in 1..=radius {
        let next: Vec<u64> = (0..n)
            .map(|i| {
                let mut nb: Vec<(u64, u64)> = mol
                    .neighbors(i)
                    .iter()
                    .filter(|(j, _)| mol.atom(*j).is_heavy())
                    .map(|&(j, b)| (mol.bond(b).order.code() as u64, current[j]))
                    .collect();
                nb.sort_unstable();
                let mut seq = vec![iteration as u64, current[i]];
                for (o, h) in nb {
                    seq.push(o);
                    seq.push(h);
                }
                hash_seq(&seq)
            })
            .collect();
        all.extend_from_slice(&next);
        current = next;
    }
    all
}

/// Morgan-style fingerprint of a sanitized molecule.
pub fn morgan_fingerprint(mol: &Molecule, radius: u32, width: usize) -> Result<Fingerprint, ChemError> {
    if !mol.is_sanitized() {
        return Err(ChemError::NotSanitized);
    }
    let mut fp = Fingerprint::empty(width, radius)?;
    fp.radius = radius;
    for (k, h) in environment_hashes(mol, radius).into_iter().enumerate() {
        // Hydrogen and attachment atoms carry no environment.
        if mol.atom(k % mol.atom_count().max(1)).is_heavy() {
            fp.set((h % width as u64) as usize);
        }
    }
    Ok(fp)
}

/// Default-parameter fingerprint.
pub fn fingerprint(mol: &Molecule) -> Fingerprint {
    morgan_fingerprint(mol, DEFAULT_RADIUS, DEFAULT_WIDTH).unwrap_or_else(|_| {
        Fingerprint::empty(DEFAULT_WIDTH, DEFAULT_RADIUS).expect("default width is valid")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::sanitize::mol_from_smiles;

    fn fp(s: &str, r: u32) -> Fingerprint {
        morgan_fingerprint(&mol_from_smiles(s).unwrap(), r, 2048).unwrap()
    }

    #[test]
    fn methane_radius_zero() {
        assert_eq!(fp("C", 0).popcount(), 1);
    }

    #[test]
    fn benzene_vs_pyridine() {
        let a = fp("c1ccccc1", 2);
        let b = fp("c1ccncc1", 2);
        let inter = a.intersection_count(&b).unwrap();
        let union = a.popcount() + b.popcount() - inter;
        assert!(inter > 0 && inter < union);
    }

    #[test]
    fn similarity_arithmetic() {
        let a = Fingerprint::from_bits(64, [1, 2, 3, 4]).unwrap();
        let b = Fingerprint::from_bits(64, [1]).unwrap();
        assert!((tanimoto(&a, &b).unwrap() - 0.25).abs() < 1e-12);
        assert!((similarity(&a, &b, Metric::Cosine).unwrap() - 0.5).abs() < 1e-12);
        let c = Fingerprint::from_bits(64, [9]).unwrap();
        assert_eq!(tanimoto(&a, &c).unwrap(), 0.0);
        assert_eq!(similarity(&a, &a, Metric::Cosine).unwrap(), 1.0);
        let e = Fingerprint::empty(64, 0).unwrap();
        assert_eq!(tanimoto(&e, &e).unwrap(), 0.0);
        let w = Fingerprint::empty(128, 0).unwrap();
        assert!(tanimoto(&a, &w).is_err());
        assert!(Fingerprint::empty(100, 0).is_err());
    }
}
