//! Gaussian RBF kernel on curvature histograms and Gram matrix assembly.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::distribution::Histogram;

/// Tolerance for the PSD diagnostic on the smallest eigenvalue.
pub const PSD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("histograms differ in shape")]
    ShapeMismatch,
    #[error("sigma must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("need at least 2 histograms, got {0}")]
    TooFewHistograms(usize),
    #[error("Gram matrix invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sigma {
    /// Median pairwise distance, see [`median_sigma`].
    Auto,
    Fixed(f64),
}

/// What the Gram matrix was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeatureDescriptor {
    pub dims: u8,
    pub bins: usize,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    size: usize,
    values: Vec<f64>,
    sigma: f64,
    descriptor: FeatureDescriptor,
}

impl GramMatrix {
    /// Wraps precomputed values, e.g. from a test fixture.
    pub fn from_values(size: usize, values: Vec<f64>, sigma: f64, descriptor: FeatureDescriptor) -> Self {
        assert_eq!(values.len(), size * size, "Gram values must be size x size");
        Self { size, values, sigma, descriptor }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn descriptor(&self) -> FeatureDescriptor {
        self.descriptor
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.descriptor.alpha = Some(alpha);
        self
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = DMatrix::from_row_slice(self.size, self.size, &self.values);
        SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Unit diagonal, symmetry within 1e-12, entries in (0, 1] and, when
    /// `check_psd` is set, smallest eigenvalue at least `-PSD_TOLERANCE`.
    pub fn check_invariants(&self, check_psd: bool) -> Result<(), KernelError> {
        let n = self.size;
        for i in 0..n {
            if self.get(i, i) != 1.0 {
                return Err(KernelError::Invariant(format!("diagonal entry {i} is {}", self.get(i, i))));
            }
            for j in 0..n {
                let (a, b) = (self.get(i, j), self.get(j, i));
                if (a - b).abs() > 1e-12 {
                    return Err(KernelError::Invariant(format!("asymmetric at ({i}, {j})")));
                }
                if !(a > 0.0 && a <= 1.0) {
                    return Err(KernelError::Invariant(format!("entry ({i}, {j}) = {a} outside (0, 1]")));
                }
            }
        }
        if check_psd && n > 0 {
            let min = self.min_eigenvalue();
            if min < -PSD_TOLERANCE {
                return Err(KernelError::Invariant(format!("smallest eigenvalue {min}")));
            }
        }
        Ok(())
    }
}

fn check_sigma(sigma: f64) -> Result<(), KernelError> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(KernelError::BadSigma(sigma))
    }
}

fn squared_distance(a: &Histogram, b: &Histogram) -> Result<f64, KernelError> {
    a.squared_distance(b).map_err(|_| KernelError::ShapeMismatch)
}

#[inline]
fn rbf_from_squared(d2: f64, sigma: f64) -> f64 {
    (-d2 / (2.0 * sigma * sigma)).exp()
}

/// `exp(-||w1 - w2||^2 / (2 sigma^2))`.
pub fn rbf_kernel(h1: &Histogram, h2: &Histogram, sigma: f64) -> Result<f64, KernelError> {
    check_sigma(sigma)?;
    Ok(rbf_from_squared(squared_distance(h1, h2)?, sigma))
}

/// Median of the values; mean of the middle two for even counts.
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn pairwise_squared(hs: &[Histogram]) -> Result<Vec<Vec<f64>>, KernelError> {
    if let Some(first) = hs.first() {
        if hs.iter().any(|h| !h.same_shape(first)) {
            return Err(KernelError::ShapeMismatch);
        }
    }
    // Row i holds distances to j > i.
    hs.par_iter()
        .enumerate()
        .map(|(i, a)| hs[i + 1..].iter().map(|b| squared_distance(a, b)).collect())
        .collect()
}

fn median_from_pairs(pairs: &[Vec<f64>]) -> f64 {
    let mut distances: Vec<f64> = pairs.iter().flatten().map(|d2| d2.sqrt()).collect();
    let m = median(&mut distances);
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// Median pairwise Euclidean distance between histograms, or 1 if that
/// median is 0.
pub fn median_sigma(hs: &[Histogram]) -> Result<f64, KernelError> {
    if hs.len() < 2 {
        return Err(KernelError::TooFewHistograms(hs.len()));
    }
    Ok(median_from_pairs(&pairwise_squared(hs)?))
}

/// Kernel values for every pair. `Sigma::Auto` on fewer than two
/// histograms falls back to sigma = 1.
pub fn gram_matrix(hs: &[Histogram], sigma: Sigma) -> Result<GramMatrix, KernelError> {
    let pairs = pairwise_squared(hs)?;
    let sigma = match sigma {
        Sigma::Fixed(s) => {
            check_sigma(s)?;
            s
        }
        Sigma::Auto if hs.len() < 2 => 1.0,
        Sigma::Auto => median_from_pairs(&pairs),
    };
    let n = hs.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for (offset, &d2) in pairs[i].iter().enumerate() {
            let j = i + 1 + offset;
            let k = rbf_from_squared(d2, sigma);
            values[i * n + j] = k;
            values[j * n + i] = k;
        }
    }
    let descriptor = match hs.first() {
        Some(h) => FeatureDescriptor { dims: h.dims(), bins: h.bins(), alpha: None },
        None => FeatureDescriptor { dims: 0, bins: 0, alpha: None },
    };
    Ok(GramMatrix { size: n, values, sigma, descriptor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::histogram_from_values;

    fn hist(values: &[f64], bins: usize) -> Histogram {
        histogram_from_values(values, bins).unwrap()
    }

    #[test]
    fn identical_histograms() {
        let h = hist(&[0.1, 0.5], 4);
        assert_eq!(rbf_kernel(&h, &h, 0.3).unwrap(), 1.0);
    }

    #[test]
    fn opposite_one_hot() {
        let a = hist(&[-0.5], 2);
        let b = hist(&[0.5], 2);
        assert!((rbf_kernel(&a, &b, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        // ||a-b||^2 = 2 = 2 sigma^2 at sigma = 1.
        assert!((rbf_kernel(&a, &b, 1.0).unwrap() - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn kernel_errors() {
        let a = hist(&[0.0], 2);
        let b = hist(&[0.0], 3);
        assert_eq!(rbf_kernel(&a, &b, 1.0), Err(KernelError::ShapeMismatch));
        assert_eq!(rbf_kernel(&a, &a, 0.0), Err(KernelError::BadSigma(0.0)));
        assert_eq!(median_sigma(&[a.clone()]), Err(KernelError::TooFewHistograms(1)));
        assert_eq!(gram_matrix(&[a, b], Sigma::Auto), Err(KernelError::ShapeMismatch));
    }

    #[test]
    fn median_conventions() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [1.0, 10.0, 2.0, 3.0]), 2.5);
        let h = hist(&[0.2], 4);
        assert_eq!(median_sigma(&[h.clone(), h]).unwrap(), 1.0);
    }

    #[test]
    fn median_sigma_of_three() {
        // One-hot vectors scaled so pairwise distances are sqrt(2); all equal.
        let hs = [hist(&[-0.9], 3), hist(&[0.0], 3), hist(&[0.9], 3)];
        assert!((median_sigma(&hs).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gram_shapes() {
        let h = hist(&[0.2, 0.4], 5);
        let gm = gram_matrix(&vec![h.clone(); 4], Sigma::Auto).unwrap();
        assert!(gm.values().iter().all(|&v| v == 1.0));
        gm.check_invariants(true).unwrap();
        let one = gram_matrix(&[h], Sigma::Auto).unwrap();
        assert_eq!(one.size(), 1);
        assert_eq!(one.get(0, 0), 1.0);
        assert_eq!(one.sigma(), 1.0);
    }

    #[test]
    fn invariant_check_catches_bad_matrices() {
        let d = FeatureDescriptor { dims: 1, bins: 1, alpha: None };
        let bad = GramMatrix::from_values(2, vec![1.0, 0.5, 0.4, 1.0], 1.0, d);
        assert!(bad.check_invariants(false).is_err());
        let not_psd = GramMatrix::from_values(3, vec![1.0, 0.9, 0.1, 0.9, 1.0, 0.9, 0.1, 0.9, 1.0], 1.0, d);
        assert!(not_psd.check_invariants(false).is_ok());
        assert!(not_psd.check_invariants(true).is_err());
    }
}
