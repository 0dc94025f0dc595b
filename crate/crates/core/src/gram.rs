//! Batch kernel-matrix computation over a dataset, PSD diagnostics and
//! export formats.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::GraphDataset;
use crate::embedding::{EmbeddingRecord, GaussianEmbedding};
use crate::error::{Error, Result};
use crate::kernel::{kernel_with_variant, KernelParams};
use crate::summary::power_summary;

/// Symmetric matrix of pairwise kernel values over a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    m: usize,
    /// Row-major m-by-m.
    values: Vec<f64>,
    labels: Vec<i64>,
    params: KernelParams,
}

impl GramMatrix {
    /// Wraps raw values without validation; intended for diagnostics such
    /// as running [`psd_check`] on hand-built matrices.
    pub fn from_parts(values: Vec<f64>, labels: Vec<i64>, params: KernelParams) -> Self {
        let m = labels.len();
        assert_eq!(values.len(), m * m, "values must be m*m");
        GramMatrix {
            m,
            values,
            labels,
            params,
        }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    /// Cosine-style normalization K_ij / sqrt(K_ii K_jj). A no-op for the
    /// corrected variant whose diagonal is already 1; meaningful for the
    /// literal variant.
    pub fn normalized(&self) -> GramMatrix {
        let m = self.m;
        let mut values = self.values.clone();
        for i in 0..m {
            for j in 0..m {
                let scale = (self.get(i, i) * self.get(j, j)).sqrt();
                values[i * m + j] = self.values[i * m + j] / scale;
            }
        }
        GramMatrix {
            m,
            values,
            labels: self.labels.clone(),
            params: self.params,
        }
    }
}

/// Computes all embeddings for a dataset in parallel. Failures abort with
/// the index of the offending graph.
pub fn compute_embeddings(
    ds: &GraphDataset,
    params: &KernelParams,
) -> Result<Vec<GaussianEmbedding>> {
    ds.graphs
        .par_iter()
        .enumerate()
        .map(|(index, g)| {
            power_summary(g, params.k)
                .and_then(|s| GaussianEmbedding::from_summary(&s, params.ridge))
                .map_err(|source| Error::Embedding {
                    index,
                    source: Box::new(source),
                })
        })
        .collect()
}

/// Computes the full kernel matrix from precomputed embeddings. Each of
/// the m(m+1)/2 distinct pairs is evaluated exactly once (in parallel)
/// and mirrored, so the result does not depend on scheduling.
pub fn gram_from_embeddings(
    embeddings: &[GaussianEmbedding],
    labels: &[i64],
    params: &KernelParams,
) -> Result<GramMatrix> {
    let m = embeddings.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i..m).map(move |j| (i, j)))
        .collect();
    let computed: Vec<((usize, usize), f64)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            kernel_with_variant(&embeddings[i], &embeddings[j], params.variant)
                .map(|v| ((i, j), v))
                .map_err(|source| Error::Pair {
                    i,
                    j,
                    source: Box::new(source),
                })
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; m * m];
    for ((i, j), v) in computed {
        values[i * m + j] = v;
        values[j * m + i] = v;
    }
    Ok(GramMatrix {
        m,
        values,
        labels: labels.to_vec(),
        params: *params,
    })
}

/// Embeds every graph (phase 1) and evaluates every pair (phase 2).
pub fn compute_gram(ds: &GraphDataset, params: &KernelParams) -> Result<GramMatrix> {
    let embeddings = compute_embeddings(ds, params)?;
    gram_from_embeddings(&embeddings, &ds.labels, params)
}

/// Positive-semidefiniteness report for a Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub pass: bool,
}

/// Symmetric eigen-solve; passes iff the smallest eigenvalue is at least
/// `-tol * trace`.
pub fn psd_check(gram: &GramMatrix, tol: f64) -> PsdReport {
    let m = DMatrix::from_row_slice(gram.m, gram.m, &gram.values);
    let trace = m.trace();
    let min_eigenvalue = m
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    PsdReport {
        min_eigenvalue,
        trace,
        pass: min_eigenvalue >= -tol * trace,
    }
}

/// Serialized form of a Gram matrix (row-major values).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramRecord {
    pub m: usize,
    pub labels: Vec<i64>,
    pub params: KernelParams,
    pub values: Vec<f64>,
}

/// Writes m+1 CSV lines: a header of graph indices, then m rows of
/// shortest-round-trip decimal values.
pub fn write_gram_csv<W: Write>(gram: &GramMatrix, mut sink: W) -> Result<()> {
    let header: Vec<String> = (0..gram.m).map(|i| i.to_string()).collect();
    writeln!(sink, "{}", header.join(","))?;
    for i in 0..gram.m {
        let row: Vec<String> = (0..gram.m).map(|j| gram.get(i, j).to_string()).collect();
        writeln!(sink, "{}", row.join(","))?;
    }
    Ok(())
}

/// Parses the CSV produced by [`write_gram_csv`]; labels and params are
/// not part of the format.
pub fn read_gram_csv<R: std::io::BufRead>(reader: R, params: KernelParams) -> Result<GramMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| Error::Malformed {
                    line: idx + 1,
                    reason: format!("invalid float {f:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let m = rows.len();
    let mut values = Vec::with_capacity(m * m);
    for row in &rows {
        if row.len() != m {
            return Err(Error::Malformed {
                line: 0,
                reason: format!("expected {m} columns, found {}", row.len()),
            });
        }
        values.extend_from_slice(row);
    }
    Ok(GramMatrix {
        m,
        values,
        labels: vec![0; m],
        params,
    })
}

pub fn write_gram_json<W: Write>(gram: &GramMatrix, mut sink: W) -> Result<()> {
    let record = GramRecord {
        m: gram.m,
        labels: gram.labels.clone(),
        params: gram.params,
        values: gram.values.clone(),
    };
    serde_json::to_writer(&mut sink, &record)?;
    writeln!(sink)?;
    Ok(())
}

pub fn read_gram_json<R: std::io::Read>(reader: R) -> Result<GramMatrix> {
    let record: GramRecord = serde_json::from_reader(reader)?;
    if record.values.len() != record.m * record.m || record.labels.len() != record.m {
        return Err(Error::LabelCount {
            graphs: record.m,
            labels: record.labels.len(),
        });
    }
    Ok(GramMatrix {
        m: record.m,
        values: record.values,
        labels: record.labels,
        params: record.params,
    })
}

/// Writes the precomputed-kernel format consumed by standard SVM tools:
/// one line per graph, `<label> 0:<serial> <j+1>:<K(i,j)> ...` with the
/// 1-based serial number in field 0 and fixed 16-decimal values.
pub fn write_gram_svm<W: Write>(gram: &GramMatrix, mut sink: W) -> Result<()> {
    for i in 0..gram.m {
        write!(sink, "{} 0:{}", gram.labels[i], i + 1)?;
        for j in 0..gram.m {
            write!(sink, " {}:{:.16}", j + 1, gram.get(i, j))?;
        }
        writeln!(sink)?;
    }
    Ok(())
}

/// Export formats for [`export_gram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
    SvmPrecomputed,
}

pub fn export_gram<W: Write>(gram: &GramMatrix, format: ExportFormat, sink: W) -> Result<()> {
    match format {
        ExportFormat::Csv => write_gram_csv(gram, sink),
        ExportFormat::Json => write_gram_json(gram, sink),
        ExportFormat::SvmPrecomputed => write_gram_svm(gram, sink),
    }
}

/// On-disk cache of phase-1 embeddings so large datasets amortize the
/// embedding pass across runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingCache {
    pub k: usize,
    pub ridge: f64,
    pub embeddings: Vec<EmbeddingRecord>,
}

impl EmbeddingCache {
    pub fn from_embeddings(embeddings: &[GaussianEmbedding], params: &KernelParams) -> Self {
        EmbeddingCache {
            k: params.k,
            ridge: params.ridge,
            embeddings: embeddings.iter().map(|e| e.to_record()).collect(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }

    /// Rehydrates the cached embeddings, refusing a cache built with
    /// different parameters.
    pub fn restore(&self, params: &KernelParams) -> Result<Vec<GaussianEmbedding>> {
        if self.k != params.k || self.ridge != params.ridge {
            return Err(Error::CacheMismatch {
                cached_k: self.k,
                cached_ridge: self.ridge,
                k: params.k,
                ridge: params.ridge,
            });
        }
        self.embeddings
            .iter()
            .map(GaussianEmbedding::from_record)
            .collect()
    }
}
