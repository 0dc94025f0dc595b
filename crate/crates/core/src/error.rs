use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by graph construction, dataset loading and kernel
/// evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("self-loop at node {node}")]
    SelfLoop { node: usize },

    #[error("node index {index} out of range for a graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("permutation of length {perm} applied to a graph with {n} nodes")]
    PermutationLength { perm: usize, n: usize },

    #[error("permutation is not a bijection")]
    PermutationNotBijective,

    #[error("operation needs at least {required} nodes, graph has {found}")]
    TooFewNodes { required: usize, found: usize },

    #[error("edge probability {p} outside [0, 1]")]
    InvalidProbability { p: f64 },

    #[error("iteration count must be at least 1")]
    ZeroIterations,

    #[error("walk count overflows u64 at step {t}")]
    CountOverflow { t: usize },

    #[error("covariance plus ridge {ridge} is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { ridge: f64, pivot: usize },

    #[error("embedding dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite kernel value (covariance condition estimates {cond_a:.3e} and {cond_b:.3e})")]
    NonFiniteKernel { cond_a: f64, cond_b: f64 },

    #[error("grid quadrature supports dimension <= 3, got {k}")]
    GridDimension { k: usize },

    #[error("invalid oracle settings: {reason}")]
    OracleSettings { reason: String },

    #[error("embedding of graph {index} failed")]
    Embedding {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("kernel evaluation failed for pair ({i}, {j})")]
    Pair {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dataset file not found: {path}")]
    MissingFile { path: PathBuf },

    #[error("node {node} is not assigned to any graph")]
    NodeWithoutGraph { node: usize },

    #[error("edge ({a}, {b}) crosses graphs {ga} and {gb}")]
    CrossGraphEdge {
        a: usize,
        b: usize,
        ga: usize,
        gb: usize,
    },

    #[error("dataset has {graphs} graphs but {labels} labels")]
    LabelCount { graphs: usize, labels: usize },

    #[error("cached embeddings were computed with k={cached_k}, ridge={cached_ridge}, requested k={k}, ridge={ridge}")]
    CacheMismatch {
        cached_k: usize,
        cached_ridge: f64,
        k: usize,
        ridge: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
