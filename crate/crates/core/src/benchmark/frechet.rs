//! Fréchet distance between Gaussian fits of descriptor vectors.
//!
//! Stands in for MOSES's FCD, which needs a pretrained network; this one
//! works on the raw 14-field descriptor vector and is not comparable to FCD.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::molgraph::{descriptors, DescriptorVector, Molecule};

/// Mean and unbiased covariance; `None` for fewer than two rows.
pub fn gaussian_fit(rows: &[Vec<f64>]) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let d = rows[0].len();
    // sorted rows make the fit independent of batch order
    let mut rows: Vec<&Vec<f64>> = rows.iter().collect();
    rows.sort_by(|a, b| a.iter().zip(b.iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    let x = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
    let mean = DVector::from_fn(d, |j, _| x.column(j).sum() / n as f64);
    let centered = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (n - 1) as f64;
    Some((mean, cov))
}

fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose()
}

/// `|m1 - m2|^2 + tr(S1 + S2 - 2 (S1 S2)^(1/2))`, with the trace of the
/// cross term taken as the sum of square roots of the eigenvalues of
/// `S1^(1/2) S2 S1^(1/2)`.
pub fn frechet_distance(a: &(DVector<f64>, DMatrix<f64>), b: &(DVector<f64>, DMatrix<f64>)) -> f64 {
    let (m1, s1) = a;
    let (m2, s2) = b;
    let r = psd_sqrt(s1);
    let inner = &r * s2 * &r;
    let inner = (&inner + inner.transpose()) * 0.5;
    let cross: f64 = SymmetricEigen::new(inner).eigenvalues.iter().map(|v| v.max(0.0).sqrt()).sum();
    let diff = m1 - m2;
    (diff.dot(&diff) + s1.trace() + s2.trace() - 2.0 * cross).max(0.0)
}

pub fn descriptor_rows(mols: &[&Molecule]) -> Vec<Vec<f64>> {
    mols.iter().filter_map(|m| descriptors(m).ok()).map(|d: DescriptorVector| d.to_vec()).collect()
}

/// Fréchet distance between the descriptor distributions of two molecule sets.
pub fn frechet_descriptor_distance(a: &[&Molecule], b: &[&Molecule]) -> Option<f64> {
    Some(frechet_distance(&gaussian_fit(&descriptor_rows(a))?, &gaussian_fit(&descriptor_rows(b))?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_closed_form() {
        // N(mean 2, var 1) vs N(mean 5, var 4): 9 + 1 + 4 - 2*2 = 10
        let a = gaussian_fit(&[vec![1.0], vec![3.0]]).unwrap();
        let b = gaussian_fit(&[vec![3.0], vec![7.0]]).unwrap();
        assert_eq!((a.1[(0, 0)], b.1[(0, 0)]), (2.0, 8.0));
        // var 2 and 8: 9 + 2 + 8 - 2*4 = 11
        assert!((frechet_distance(&a, &b) - 11.0).abs() < 1e-9);
    }

    #[test]
    fn self_distance_is_zero() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * i % 7) as f64, 300.0 + i as f64 * 3.5]).collect();
        let g = gaussian_fit(&rows).unwrap();
        assert!(frechet_distance(&g, &g) < 1e-6);
        assert!(gaussian_fit(&rows[..1]).is_none());
    }
}
