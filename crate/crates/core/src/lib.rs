//! Graph kernels from Gaussian embeddings of power-iteration summaries.
//!
//! A graph is summarized by k normalized power iterates of its adjacency
//! matrix started from the all-ones vector. Because that start vector is
//! blind to node identity, relabeling a graph only permutes the rows of
//! the summary, so the mean and covariance of those rows are graph
//! invariants. Each graph becomes a multivariate Gaussian over its
//! summary rows, and the kernel between two graphs is the closed-form
//! Bhattacharyya coefficient between their Gaussians: 1 for isomorphic
//! graphs, positive semidefinite over any collection, and computable in
//! time linear in the number of edges per graph.
//!
//! The crate provides the graph and dataset types, the summary and
//! embedding steps, the closed-form kernel with a numerical-integration
//! reference, and batch Gram-matrix computation with CSV/JSON/SVM
//! exports.

#![forbid(unsafe_code)]

pub mod dataset;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod gram;
pub mod kernel;
pub mod linalg;
pub mod oracle;
pub mod summary;

pub use dataset::{load_edge_list, load_tu_dataset, GraphDataset, LoadedDataset, LoadedGraph};
pub use embedding::{EmbeddingRecord, GaussianEmbedding};
pub use error::{Error, Result};
pub use graph::{erdos_renyi, Graph, Permutation};
pub use gram::{
    compute_embeddings, compute_gram, export_gram, gram_from_embeddings, psd_check, read_gram_csv,
    read_gram_json, write_gram_csv, write_gram_json, write_gram_svm, EmbeddingCache, ExportFormat,
    GramMatrix, GramRecord, PsdReport,
};
pub use kernel::{
    kernel, kernel_literal_eq5, kernel_with_variant, KernelParams, Variant, DEFAULT_K,
    DEFAULT_RIDGE,
};
pub use oracle::{bhattacharyya_oracle, OracleEstimate, OracleMethod};
pub use summary::{power_summary, power_summary_with_scale, walk_counts, PowerSummary};
