//! Shared fixtures for the criterion benchmarks.

use power_kernel::{erdos_renyi, GaussianEmbedding, Graph, KernelParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sparse random graph with roughly `edges` edges at the given average
/// degree, deterministic per seed.
pub fn bench_graph(edges: usize, avg_degree: usize, seed: u64) -> Graph {
    let n = (2 * edges / avg_degree).max(2);
    let p = (avg_degree as f64 / (n - 1) as f64).min(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    erdos_renyi(n, p, &mut rng).expect("valid probability")
}

pub fn bench_embedding(edges: usize, seed: u64, params: &KernelParams) -> GaussianEmbedding {
    let graph = bench_graph(edges, 10, seed);
    let summary = power_kernel::power_summary(&graph, params.k).expect("k >= 1");
    GaussianEmbedding::from_summary(&summary, params.ridge).expect("ridge keeps sigma definite")
}
