//! Dense symmetric positive-definite factorization for the small k-by-k
//! covariance matrices, with the log-determinant kept in log space.

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive-definite
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    dim: usize,
    /// Row-major dense storage; entries above the diagonal are zero.
    lower: Vec<f64>,
    log_det: f64,
}

impl CholeskyFactor {
    /// Factors a row-major `dim`-by-`dim` symmetric matrix. Fails with the
    /// offending pivot index when the matrix is not positive definite;
    /// `ridge` is only reported in the error.
    pub fn factor(matrix: &[f64], dim: usize, ridge: f64) -> Result<Self> {
        debug_assert_eq!(matrix.len(), dim * dim);
        let mut lower = vec![0.0; dim * dim];
        let mut log_det = 0.0;
        for j in 0..dim {
            let mut diag = matrix[j * dim + j];
            for p in 0..j {
                diag -= lower[j * dim + p] * lower[j * dim + p];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite { ridge, pivot: j });
            }
            let pivot = diag.sqrt();
            lower[j * dim + j] = pivot;
            log_det += pivot.ln();
            for i in (j + 1)..dim {
                let mut sum = matrix[i * dim + j];
                for p in 0..j {
                    sum -= lower[i * dim + p] * lower[j * dim + p];
                }
                lower[i * dim + j] = sum / pivot;
            }
        }
        Ok(CholeskyFactor {
            dim,
            lower,
            log_det: 2.0 * log_det,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// log |A| for the factored matrix A, accumulated as 2 * sum(log L_jj).
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.dim).map(move |j| self.lower[j * self.dim + j])
    }

    /// Squared-condition estimate from the factor diagonal,
    /// (max L_jj / min L_jj)^2.
    pub fn condition_estimate(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for d in self.diagonal() {
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (hi / lo) * (hi / lo)
    }

    /// Solves A x = b via the two triangular solves.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = self.solve_lower(b);
        // L^T x = y, backward.
        for i in (0..self.dim).rev() {
            let mut sum = x[i];
            for j in (i + 1)..self.dim {
                sum -= self.lower[j * self.dim + i] * x[j];
            }
            x[i] = sum / self.lower[i * self.dim + i];
        }
        x
    }

    /// Solves L y = b, forward.
    fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            let mut sum = b[i];
            for j in 0..i {
                sum -= self.lower[i * self.dim + j] * y[j];
            }
            y[i] = sum / self.lower[i * self.dim + i];
        }
        y
    }

    /// Quadratic form b^T A^{-1} b as the squared norm of L^{-1} b.
    pub fn quadratic_form(&self, b: &[f64]) -> f64 {
        self.solve_lower(b).iter().map(|v| v * v).sum()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
