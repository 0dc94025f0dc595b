//! Wall-time measurement of summary + embedding over growing edge counts
//! at fixed average degree.

use std::io::Write;
use std::time::Instant;

use power_kernel::{erdos_renyi, power_summary, GaussianEmbedding, Graph};

use crate::{stream_rng, streams, CliError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    /// Target edge count the graph was sized for.
    pub edges: usize,
    pub nodes: usize,
    /// Median seconds for one power summary plus embedding.
    pub wall_time: f64,
}

/// Generates one sparse graph per target edge count (n = 2E/degree,
/// p = degree/(n-1)), then times `power_summary` + embedding `repeats`
/// times and keeps the median. Generation is excluded from the timing.
pub fn run_scaling_benchmark(
    sizes: &[usize],
    avg_degree: usize,
    repeats: usize,
    k: usize,
    ridge: f64,
    seed: u64,
) -> Result<Vec<ScalingRow>, CliError> {
    if avg_degree == 0 {
        return Err(CliError::Usage("--avg-degree must be positive".into()));
    }
    if repeats == 0 {
        return Err(CliError::Usage("--repeats must be positive".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for (index, &edges) in sizes.iter().enumerate() {
        let nodes = (2 * edges / avg_degree).max(2);
        let p = (avg_degree as f64 / (nodes - 1) as f64).min(1.0);
        let mut rng = stream_rng(seed, streams::GENERATE + index as u64);
        let graph = erdos_renyi(nodes, p, &mut rng)?;
        let mut times: Vec<f64> = (0..repeats).map(|_| time_embed(&graph, k, ridge)).collect::<Result<_, _>>()?;
        times.sort_by(|a, b| a.total_cmp(b));
        rows.push(ScalingRow {
            edges,
            nodes,
            wall_time: times[times.len() / 2],
        });
    }
    Ok(rows)
}

fn time_embed(graph: &Graph, k: usize, ridge: f64) -> Result<f64, CliError> {
    let start = Instant::now();
    let summary = power_summary(graph, k)?;
    let embedding = GaussianEmbedding::from_summary(&summary, ridge)?;
    let elapsed = start.elapsed().as_secs_f64();
    std::hint::black_box(embedding);
    Ok(elapsed)
}

pub fn write_scaling_csv<W: Write>(rows: &[ScalingRow], mut sink: W) -> std::io::Result<()> {
    writeln!(sink, "E,n,wall_time")?;
    for row in rows {
        writeln!(sink, "{},{},{}", row.edges, row.nodes, row.wall_time)?;
    }
    Ok(())
}
