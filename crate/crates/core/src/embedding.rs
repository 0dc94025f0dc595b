//! Gaussian functional embedding of a power summary: row mean, row
//! covariance with ridge stabilization, and the cached factorization the
//! kernel needs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CholeskyFactor;
use crate::summary::PowerSummary;

/// The multivariate Gaussian fitted to the rows of a power summary.
///
/// `sigma` already includes the ridge term. The Cholesky factor, the
/// log-determinant and `sigma^{-1} mu` are computed once at construction
/// and shared by every kernel evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianEmbedding {
    k: usize,
    ridge: f64,
    mu: Vec<f64>,
    /// Row-major k-by-k, exactly symmetric.
    sigma: Vec<f64>,
    chol: CholeskyFactor,
    log_det: f64,
    precision_mu: Vec<f64>,
}

impl GaussianEmbedding {
    /// Fits the Gaussian to the rows of `summary`: `mu` is the mean over
    /// the n node rows and `sigma` the population covariance (1/n) of the
    /// rows plus `ridge` on the diagonal.
    pub fn from_summary(summary: &PowerSummary, ridge: f64) -> Result<Self> {
        let n = summary.node_count();
        let k = summary.iteration_count();
        let n_f = n as f64;
        let mut mu = vec![0.0; k];
        for (t, slot) in mu.iter_mut().enumerate() {
            *slot = summary.column(t).iter().sum::<f64>() / n_f;
        }
        let mut sigma = vec![0.0; k * k];
        for t1 in 0..k {
            let col1 = summary.column(t1);
            for t2 in t1..k {
                let col2 = summary.column(t2);
                let mut acc = 0.0;
                for i in 0..n {
                    acc += (col1[i] - mu[t1]) * (col2[i] - mu[t2]);
                }
                let value = acc / n_f;
                sigma[t1 * k + t2] = value;
                sigma[t2 * k + t1] = value;
            }
        }
        Self::from_ridged_moments(mu, sigma, ridge, true)
    }

    /// Builds an embedding from raw moments; `ridge` is added to the
    /// diagonal of `sigma`.
    pub fn from_moments(mu: Vec<f64>, sigma: Vec<f64>, ridge: f64) -> Result<Self> {
        Self::from_ridged_moments(mu, sigma, ridge, true)
    }

    fn from_ridged_moments(
        mu: Vec<f64>,
        mut sigma: Vec<f64>,
        ridge: f64,
        add_ridge: bool,
    ) -> Result<Self> {
        let k = mu.len();
        if sigma.len() != k * k {
            return Err(Error::DimensionMismatch {
                left: k * k,
                right: sigma.len(),
            });
        }
        if add_ridge && ridge != 0.0 {
            for t in 0..k {
                sigma[t * k + t] += ridge;
            }
        }
        let chol = CholeskyFactor::factor(&sigma, k, ridge)?;
        let log_det = chol.log_det();
        let precision_mu = chol.solve(&mu);
        Ok(GaussianEmbedding {
            k,
            ridge,
            mu,
            sigma,
            chol,
            log_det,
            precision_mu,
        })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Ridged covariance, row-major k-by-k.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn cholesky(&self) -> &CholeskyFactor {
        &self.chol
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Cached `sigma^{-1} mu`.
    pub fn precision_mu(&self) -> &[f64] {
        &self.precision_mu
    }

    pub fn to_record(&self) -> EmbeddingRecord {
        EmbeddingRecord {
            k: self.k,
            ridge: self.ridge,
            mu: self.mu.clone(),
            sigma: (0..self.k)
                .map(|i| self.sigma[i * self.k..(i + 1) * self.k].to_vec())
                .collect(),
        }
    }

    /// Rebuilds an embedding from a serialized record. The stored sigma
    /// already contains the ridge, so none is re-added.
    pub fn from_record(record: &EmbeddingRecord) -> Result<Self> {
        let k = record.k;
        if record.mu.len() != k || record.sigma.len() != k {
            return Err(Error::DimensionMismatch {
                left: k,
                right: record.mu.len(),
            });
        }
        let mut sigma = Vec::with_capacity(k * k);
        for row in &record.sigma {
            if row.len() != k {
                return Err(Error::DimensionMismatch {
                    left: k,
                    right: row.len(),
                });
            }
            sigma.extend_from_slice(row);
        }
        Self::from_ridged_moments(record.mu.clone(), sigma, record.ridge, false)
    }
}

/// Serialized form of an embedding: the moments plus the parameters they
/// were computed with. `sigma` is stored with the ridge applied so a
/// round trip reproduces the embedding bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub k: usize,
    pub ridge: f64,
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{erdos_renyi, Graph, Permutation};
    use crate::summary::power_summary;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn embed(g: &Graph, k: usize, ridge: f64) -> Result<GaussianEmbedding> {
        GaussianEmbedding::from_summary(&power_summary(g, k)?, ridge)
    }

    #[test]
    fn path_embedding_by_hand() {
        // S(P3, k=2) has rows [1/3, 1/2], [2/3, 1/2], [1/3, 1/2]:
        // mu = [4/9, 1/2], raw sigma = [[2/81, 0], [0, 0]].
        assert!(matches!(
            embed(&path3(), 2, 0.0),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let e = embed(&path3(), 2, 1e-6).unwrap();
        assert!((e.mu()[0] - 4.0 / 9.0).abs() < 1e-15);
        assert!((e.mu()[1] - 0.5).abs() < 1e-15);
        let sigma = e.sigma();
        assert!((sigma[0] - (2.0 / 81.0 + 1e-6)).abs() < 1e-16);
        assert!(sigma[1].abs() < 1e-16);
        assert!(sigma[2].abs() < 1e-16);
        assert!((sigma[3] - 1e-6).abs() < 1e-21);
    }

    #[test]
    fn regular_graph_collapses_to_ridge() {
        // All rows of S(K3) are identical, so the raw covariance is exactly 0.
        let e = embed(&triangle(), 2, 1e-6).unwrap();
        assert!((e.mu()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.mu()[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.sigma(), &[1e-6, 0.0, 0.0, 1e-6]);
    }

    #[test]
    fn single_node_graph_is_legal_with_ridge() {
        let g = Graph::from_edges(1, []).unwrap();
        let e = embed(&g, 4, 1e-6).unwrap();
        assert!(e.mu().iter().all(|&v| v == 0.0));
        assert!(embed(&g, 4, 0.0).is_err());
    }

    #[test]
    fn sigma_is_exactly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = erdos_renyi(40, 0.2, &mut rng).unwrap();
        let e = embed(&g, 5, 1e-6).unwrap();
        let k = e.dim();
        for i in 0..k {
            for j in 0..k {
                assert_eq!(e.sigma()[i * k + j], e.sigma()[j * k + i]);
            }
        }
        assert!(e.cholesky().diagonal().all(|d| d > 0.0));
        let sum_logs: f64 = e.cholesky().diagonal().map(f64::ln).sum();
        assert!((e.log_det() - 2.0 * sum_logs).abs() < 1e-12);
    }

    #[test]
    fn permutation_invariance_of_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut worst_mu: f64 = 0.0;
        let mut worst_sigma: f64 = 0.0;
        for _ in 0..100 {
            let n = rng.random_range(1..=50);
            let g = erdos_renyi(n, 0.25, &mut rng).unwrap();
            let p = Permutation::random(n, &mut rng);
            let e = embed(&g, 5, 1e-6).unwrap();
            let ep = embed(&g.permuted(&p).unwrap(), 5, 1e-6).unwrap();
            for (a, b) in e.mu().iter().zip(ep.mu()) {
                worst_mu = worst_mu.max((a - b).abs());
            }
            for (a, b) in e.sigma().iter().zip(ep.sigma()) {
                worst_sigma = worst_sigma.max((a - b).abs());
            }
        }
        assert!(worst_mu <= 1e-9, "mu deviation {worst_mu}");
        assert!(worst_sigma <= 1e-9, "sigma deviation {worst_sigma}");
    }

    #[test]
    fn first_mean_component_is_mean_normalized_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let n = rng.random_range(1..=50);
            let g = erdos_renyi(n, 0.3, &mut rng).unwrap();
            let e = embed(&g, 5, 1e-6).unwrap();
            let expected = 2.0 * g.edge_count() as f64 / (n as f64 * n as f64);
            assert!(
                (e.mu()[0] - expected).abs() <= 1e-12 * expected.max(1.0),
                "{} vs {}",
                e.mu()[0],
                expected
            );
        }
    }

    #[test]
    fn raw_covariance_is_positive_semidefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..25 {
            let n = rng.random_range(2..=40);
            let g = erdos_renyi(n, 0.25, &mut rng).unwrap();
            let ridge = 1e-6;
            let e = embed(&g, 5, ridge).unwrap();
            let k = e.dim();
            let mut raw = e.sigma().to_vec();
            let mut trace = 0.0;
            for t in 0..k {
                raw[t * k + t] -= ridge;
                trace += e.sigma()[t * k + t];
            }
            let m = DMatrix::from_row_slice(k, k, &raw);
            let min_eig = m
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            assert!(min_eig >= -1e-10 * trace, "min eigenvalue {min_eig}");
        }
    }

    #[test]
    fn embedding_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let g = erdos_renyi(35, 0.2, &mut rng).unwrap();
        let a = embed(&g, 5, 1e-6).unwrap();
        let b = embed(&g, 5, 1e-6).unwrap();
        assert_eq!(a.mu(), b.mu());
        assert_eq!(a.sigma(), b.sigma());
    }

    #[test]
    fn record_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let g = erdos_renyi(30, 0.25, &mut rng).unwrap();
        let e = embed(&g, 5, 1e-6).unwrap();
        let json = serde_json::to_string(&e.to_record()).unwrap();
        let record: EmbeddingRecord = serde_json::from_str(&json).unwrap();
        let rebuilt = GaussianEmbedding::from_record(&record).unwrap();
        assert_eq!(rebuilt.mu(), e.mu());
        assert_eq!(rebuilt.sigma(), e.sigma());
        assert_eq!(rebuilt.log_det(), e.log_det());
    }
}
