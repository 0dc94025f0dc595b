//! Perturbation stability: kernel between a graph and cumulatively
//! edge-flipped copies of itself, averaged over a sample of graphs.

use std::io::Write;

use power_kernel::{
    kernel_with_variant, power_summary, GaussianEmbedding, GraphDataset, KernelParams,
};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::{stream_rng, streams, CliError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub flips: usize,
    pub mean_kernel: f64,
    pub stderr: f64,
}

/// Mean kernel against the original graph after 0..=flips cumulative
/// random edge flips, over `sample_count` graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationTrace {
    pub rows: Vec<TraceRow>,
    pub sample_count: usize,
    pub seed: u64,
}

impl PerturbationTrace {
    pub fn final_mean(&self) -> f64 {
        self.rows.last().map(|r| r.mean_kernel).unwrap_or(f64::NAN)
    }
}

/// Runs the study: samples `sample` graphs with at least two nodes
/// (sampled once per seed), flips each one `flips` times cumulatively and
/// records the kernel against the unperturbed graph after every flip.
/// Flip randomness for a graph is keyed by its dataset index, so results
/// do not depend on scheduling.
pub fn run_perturbation(
    ds: &GraphDataset,
    params: &KernelParams,
    sample: usize,
    flips: usize,
    seed: u64,
) -> Result<PerturbationTrace, CliError> {
    let mut usable: Vec<usize> = (0..ds.len())
        .filter(|&i| ds.graphs[i].node_count() >= 2)
        .collect();
    if usable.len() < sample {
        return Err(CliError::Data(format!(
            "perturbation needs {sample} graphs with >= 2 nodes, dataset {} has {}",
            ds.name,
            usable.len()
        )));
    }
    usable.shuffle(&mut stream_rng(seed, streams::SAMPLE));
    usable.truncate(sample);
    usable.sort_unstable();

    // One row of kernel values per sampled graph, flips 0..=flips.
    let per_graph: Vec<Vec<f64>> = usable
        .par_iter()
        .map(|&index| -> Result<Vec<f64>, CliError> {
            let original = &ds.graphs[index];
            let reference =
                GaussianEmbedding::from_summary(&power_summary(original, params.k)?, params.ridge)?;
            let mut rng = stream_rng(seed, streams::FLIP + index as u64);
            let mut values = Vec::with_capacity(flips + 1);
            values.push(kernel_with_variant(&reference, &reference, params.variant)?);
            let mut current = original.clone();
            for _ in 0..flips {
                current = current.flip_random_edge(&mut rng)?;
                let embedded = GaussianEmbedding::from_summary(
                    &power_summary(&current, params.k)?,
                    params.ridge,
                )?;
                values.push(kernel_with_variant(&reference, &embedded, params.variant)?);
            }
            Ok(values)
        })
        .collect::<Result<_, _>>()?;

    let samples = per_graph.len() as f64;
    let rows = (0..=flips)
        .map(|flip| {
            let mean = per_graph.iter().map(|v| v[flip]).sum::<f64>() / samples;
            let stderr = if per_graph.len() > 1 {
                let var = per_graph
                    .iter()
                    .map(|v| (v[flip] - mean) * (v[flip] - mean))
                    .sum::<f64>()
                    / (samples - 1.0);
                (var / samples).sqrt()
            } else {
                0.0
            };
            TraceRow {
                flips: flip,
                mean_kernel: mean,
                stderr,
            }
        })
        .collect();
    Ok(PerturbationTrace {
        rows,
        sample_count: usable.len(),
        seed,
    })
}

pub fn write_trace_csv<W: Write>(trace: &PerturbationTrace, mut sink: W) -> std::io::Result<()> {
    writeln!(sink, "flips,mean_kernel,stderr")?;
    for row in &trace.rows {
        writeln!(sink, "{},{},{}", row.flips, row.mean_kernel, row.stderr)?;
    }
    Ok(())
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRow>, CliError> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(CliError::Data(format!("bad trace row {line:?}")));
            }
            Ok(TraceRow {
                flips: fields[0]
                    .parse()
                    .map_err(|_| CliError::Data(format!("bad flips {line:?}")))?,
                mean_kernel: fields[1]
                    .parse()
                    .map_err(|_| CliError::Data(format!("bad mean {line:?}")))?,
                stderr: fields[2]
                    .parse()
                    .map_err(|_| CliError::Data(format!("bad stderr {line:?}")))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{synthetic_dataset, SyntheticSpec};

    fn small_dataset() -> GraphDataset {
        synthetic_dataset(
            SyntheticSpec {
                n: 12,
                p: 0.3,
                count: 10,
            },
            5,
        )
        .unwrap()
    }

    #[test]
    fn trace_starts_at_one_and_stays_in_range() {
        let ds = small_dataset();
        let trace = run_perturbation(&ds, &KernelParams::default(), 8, 6, 3).unwrap();
        assert_eq!(trace.rows.len(), 7);
        assert!((trace.rows[0].mean_kernel - 1.0).abs() <= 1e-9);
        assert_eq!(trace.rows[0].stderr, 0.0);
        for row in &trace.rows {
            assert!(row.mean_kernel > 0.0 && row.mean_kernel <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn trace_is_bit_reproducible_across_worker_counts() {
        let ds = small_dataset();
        let params = KernelParams::default();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_perturbation(&ds, &params, 8, 6, 11).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
    }

    #[test]
    fn insufficient_graphs_is_reported() {
        let ds = small_dataset();
        assert!(matches!(
            run_perturbation(&ds, &KernelParams::default(), 50, 3, 1),
            Err(CliError::Data(_))
        ));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let ds = small_dataset();
        let trace = run_perturbation(&ds, &KernelParams::default(), 6, 4, 9).unwrap();
        let mut out = Vec::new();
        write_trace_csv(&trace, &mut out).unwrap();
        let rows = parse_trace_csv(&String::from_utf8(out).unwrap()).unwrap();
        assert_eq!(rows, trace.rows);
    }
}
