//! Power-iteration summaries and exact walk counts.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// The n-by-k matrix whose column `t` (1-based) is the `t`-th power
/// iterate of the adjacency matrix started from the all-ones vector, with
/// L1 normalization applied to the previous iterate before each product.
///
/// Columns are stored as produced: column `t` is `A * (x_(t-1) / ||x_(t-1)||_1)`
/// and is not itself re-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSummary {
    n: usize,
    k: usize,
    /// Column-major, length `n * k`.
    data: Vec<f64>,
}

impl PowerSummary {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn iteration_count(&self) -> usize {
        self.k
    }

    /// Column `t`, 0-based: the (t+1)-th iterate.
    pub fn column(&self, t: usize) -> &[f64] {
        &self.data[t * self.n..(t + 1) * self.n]
    }

    pub fn get(&self, node: usize, t: usize) -> f64 {
        self.data[t * self.n + node]
    }

    /// Row for one node across all iterates.
    pub fn row(&self, node: usize) -> Vec<f64> {
        (0..self.k).map(|t| self.get(node, t)).collect()
    }
}

/// Runs `k` normalized power iterations from the all-ones start vector.
///
/// Each iteration is a sparse neighbor-list traversal, O(E). A zero-norm
/// iterate (edgeless graph or dead end) makes every later column zero.
pub fn power_summary(g: &Graph, k: usize) -> Result<PowerSummary> {
    power_summary_with_scale(g, k, 1.0)
}

/// Same as [`power_summary`] but starting from `scale` times the all-ones
/// vector. Exists to check that the summary does not depend on the scale
/// of the start vector; any `scale > 0` yields the same columns.
pub fn power_summary_with_scale(g: &Graph, k: usize, scale: f64) -> Result<PowerSummary> {
    if k == 0 {
        return Err(Error::ZeroIterations);
    }
    let n = g.node_count();
    let mut data = vec![0.0; n * k];
    let mut current = vec![scale; n];
    for t in 0..k {
        let norm: f64 = current.iter().map(|v| v.abs()).sum();
        let column = &mut data[t * n..(t + 1) * n];
        if norm > 0.0 {
            // A * (x / norm) computed as (A * x) / norm: the matvec over unit
            // start values then stays exact in floating point.
            for (i, slot) in column.iter_mut().enumerate() {
                let sum: f64 = g.neighbors(i).iter().map(|&j| current[j]).sum();
                *slot = sum / norm;
            }
        }
        current.copy_from_slice(column);
    }
    Ok(PowerSummary { n, k, data })
}

/// Exact number of length-`t` walks starting at each node (vertex
/// repetition allowed), i.e. the entries of A^t applied to the all-ones
/// vector, in 64-bit integers with overflow detection.
pub fn walk_counts(g: &Graph, t: usize) -> Result<Vec<u64>> {
    if t == 0 {
        return Err(Error::ZeroIterations);
    }
    let n = g.node_count();
    let mut current = vec![1u64; n];
    for step in 1..=t {
        let mut next = vec![0u64; n];
        for (i, slot) in next.iter_mut().enumerate() {
            let mut acc = 0u64;
            for &j in g.neighbors(i) {
                acc = acc
                    .checked_add(current[j])
                    .ok_or(Error::CountOverflow { t: step })?;
            }
            *slot = acc;
        }
        current = next;
    }
    Ok(current)
}
