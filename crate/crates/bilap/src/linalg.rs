//! Pentadiagonal symmetric positive definite solves.
//!
//! The discrete `H^2_V` inner product matrix `A = sigma_N (L^T W L + W V)`
//! has bandwidth 2 because `L` is tridiagonal. One Cholesky factorization
//! per solve session supports Riesz preconditioning, dual-norm residuals,
//! and direct linear solves, all in `O(M)` per application.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} at row {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("band lengths are inconsistent with size {size}")]
    BadBands { size: usize },
}

/// Symmetric pentadiagonal matrix in lower-band storage:
/// `diag[i] = A[i][i]`, `sub1[i] = A[i][i-1]` (i >= 1),
/// `sub2[i] = A[i][i-2]` (i >= 2). The leading unused entries of the
/// sub-bands are kept as zeros so every band has the same length.
#[derive(Debug, Clone)]
pub struct BandedSpd {
    pub diag: Vec<f64>,
    pub sub1: Vec<f64>,
    pub sub2: Vec<f64>,
}

impl BandedSpd {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.len();
        debug_assert_eq!(x.len(), m);
        let mut out = vec![0.0; m];
        for i in 0..m {
            let mut v = self.diag[i] * x[i];
            if i >= 1 {
                v += self.sub1[i] * x[i - 1];
            }
            if i >= 2 {
                v += self.sub2[i] * x[i - 2];
            }
            if i + 1 < m {
                v += self.sub1[i + 1] * x[i + 1];
            }
            if i + 2 < m {
                v += self.sub2[i + 2] * x[i + 2];
            }
            out[i] = v;
        }
        out
    }

    pub fn factor(&self) -> Result<BandedCholesky, LinalgError> {
        let m = self.len();
        if self.sub1.len() != m || self.sub2.len() != m {
            return Err(LinalgError::BadBands { size: m });
        }
        let mut l0 = vec![0.0; m];
        let mut l1 = vec![0.0; m];
        let mut l2 = vec![0.0; m];
        for i in 0..m {
            if i >= 2 {
                l2[i] = self.sub2[i] / l0[i - 2];
            }
            if i >= 1 {
                let mut v = self.sub1[i];
                if i >= 2 {
                    v -= l2[i] * l1[i - 1];
                }
                l1[i] = v / l0[i - 1];
            }
            let pivot = self.diag[i] - l1[i] * l1[i] - l2[i] * l2[i];
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { index: i, pivot });
            }
            l0[i] = pivot.sqrt();
        }
        Ok(BandedCholesky { l0, l1, l2 })
    }
}

/// Cholesky factor `A = L L^T` with `L` lower triangular of bandwidth 2.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    l0: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl BandedCholesky {
    pub fn len(&self) -> usize {
        self.l0.len()
    }

    fn forward(&self, b: &[f64]) -> Vec<f64> {
        let m = self.len();
        debug_assert_eq!(b.len(), m);
        let mut y = vec![0.0; m];
        for i in 0..m {
            let mut v = b[i];
            if i >= 1 {
                v -= self.l1[i] * y[i - 1];
            }
            if i >= 2 {
                v -= self.l2[i] * y[i - 2];
            }
            y[i] = v / self.l0[i];
        }
        y
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.len();
        let mut x = self.forward(b);
        for i in (0..m).rev() {
            let mut v = x[i];
            if i + 1 < m {
                v -= self.l1[i + 1] * x[i + 1];
            }
            if i + 2 < m {
                v -= self.l2[i + 2] * x[i + 2];
            }
            x[i] = v / self.l0[i];
        }
        x
    }

    /// `sqrt(g^T A^{-1} g) = ||L^{-1} g||_2`; only the forward sweep is needed.
    pub fn dual_norm(&self, g: &[f64]) -> f64 {
        let y = self.forward(g);
        y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}
