//! Gram production: embeddings (optionally cached on disk), the kernel
//! matrix, exports, the PSD report and a kernel 1-NN sanity accuracy.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use power_kernel::{
    compute_embeddings, export_gram, gram_from_embeddings, psd_check, EmbeddingCache, ExportFormat,
    GaussianEmbedding, GramMatrix, GraphDataset, KernelParams, PsdReport,
};
use rand::seq::SliceRandom;

use crate::{stream_rng, streams, CliError};

#[derive(Debug)]
pub struct GramRunOutput {
    pub gram: GramMatrix,
    pub psd: PsdReport,
    /// 10-fold kernel 1-nearest-neighbor accuracy; a plain sanity
    /// statistic, not an SVM evaluation.
    pub cv_accuracy: Option<f64>,
    pub files: Vec<PathBuf>,
}

fn extension(format: ExportFormat) -> &'static str {
    match format {
        ExportFormat::Csv => "csv",
        ExportFormat::Json => "json",
        ExportFormat::SvmPrecomputed => "svm",
    }
}

/// Loads embeddings from the cache when it matches (graph count, k,
/// ridge); otherwise computes them and rewrites the cache.
fn embeddings_with_cache(
    ds: &GraphDataset,
    params: &KernelParams,
    cache: Option<&Path>,
) -> Result<Vec<GaussianEmbedding>, CliError> {
    if let Some(path) = cache {
        if path.is_file() {
            let stored = EmbeddingCache::read(path)?;
            if stored.k == params.k
                && stored.ridge == params.ridge
                && stored.embeddings.len() == ds.len()
            {
                return Ok(stored.restore(params)?);
            }
            eprintln!(
                "note: cache {} does not match (k, ridge, graph count); recomputing",
                path.display()
            );
        }
    }
    let embeddings = compute_embeddings(ds, params)?;
    if let Some(path) = cache {
        EmbeddingCache::from_embeddings(&embeddings, params).write(path)?;
    }
    Ok(embeddings)
}

/// Computes the Gram matrix and writes one file per requested format at
/// `<out>.<ext>`.
pub fn run_gram(
    ds: &GraphDataset,
    params: &KernelParams,
    normalize: bool,
    out: &Path,
    formats: &[ExportFormat],
    cache: Option<&Path>,
    psd_tol: f64,
    seed: u64,
) -> Result<GramRunOutput, CliError> {
    let embeddings = embeddings_with_cache(ds, params, cache)?;
    let mut gram = gram_from_embeddings(&embeddings, &ds.labels, params)?;
    if normalize {
        gram = gram.normalized();
    }
    let mut files = Vec::new();
    for &format in formats {
        let path = out.with_extension(extension(format));
        let sink = BufWriter::new(File::create(&path)?);
        export_gram(&gram, format, sink)?;
        files.push(path);
    }
    let psd = psd_check(&gram, psd_tol);
    let cv_accuracy = kernel_one_nn_accuracy(&gram, 10, seed);
    Ok(GramRunOutput {
        gram,
        psd,
        cv_accuracy,
        files,
    })
}

/// K-fold cross-validated 1-nearest-neighbor accuracy using kernel values
/// as similarities. Deterministic given the seed; `None` when the dataset
/// is too small to split.
pub fn kernel_one_nn_accuracy(gram: &GramMatrix, folds: usize, seed: u64) -> Option<f64> {
    let m = gram.size();
    if m < 2 {
        return None;
    }
    let folds = folds.min(m);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut stream_rng(seed, streams::CROSS_VALIDATION));
    let mut fold_of = vec![0usize; m];
    for (pos, &index) in order.iter().enumerate() {
        fold_of[index] = pos % folds;
    }
    let mut correct = 0usize;
    for test in 0..m {
        let mut best: Option<(f64, usize)> = None;
        for train in 0..m {
            if fold_of[train] == fold_of[test] {
                continue;
            }
            let value = gram.get(test, train);
            if best.is_none_or(|(b, _)| value > b) {
                best = Some((value, train));
            }
        }
        if let Some((_, neighbor)) = best {
            if gram.labels()[neighbor] == gram.labels()[test] {
                correct += 1;
            }
        }
    }
    Some(correct as f64 / m as f64)
}
