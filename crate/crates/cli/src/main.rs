use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use power_kernel::{ExportFormat, KernelParams, Variant, DEFAULT_K, DEFAULT_RIDGE};
use power_kernel_cli::gram_run::run_gram;
use power_kernel_cli::invariance::run_invariance_suite;
use power_kernel_cli::perturb::{run_perturbation, write_trace_csv};
use power_kernel_cli::scaling::{run_scaling_benchmark, write_scaling_csv};
use power_kernel_cli::source::{resolve_dataset, SyntheticSpec};
use power_kernel_cli::CliError;

/// Graph kernels from Gaussian embeddings of power-iteration summaries.
#[derive(Parser, Debug)]
#[command(name = "powerkern", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the kernel matrix over a dataset and export it
    Gram(GramArgs),
    /// Kernel decay under cumulative random edge flips
    Perturb(PerturbArgs),
    /// Run the invariance batteries; exit 3 on any violation
    Invariance(InvarianceArgs),
    /// Time summary+embedding across growing edge counts
    Bench(BenchArgs),
    /// Dump per-graph Gaussian embeddings as JSON
    EmbedDump(EmbedDumpArgs),
}

#[derive(Args, Debug, Clone)]
struct SourceOpts {
    /// TU benchmark directory (or set POWERKERN_DATA)
    #[arg(long, env = "POWERKERN_DATA", value_name = "DIR")]
    dataset: Option<PathBuf>,
    /// TU dataset name, e.g. MUTAG
    #[arg(long, value_name = "NAME")]
    name: Option<String>,
    /// Synthetic Erdős–Rényi source: n,p,count
    #[arg(long, value_name = "N,P,COUNT", conflicts_with_all = ["dataset", "name"])]
    synthetic: Option<SyntheticSpec>,
    /// Drop self-loops found in input files (with a warning) instead of
    /// rejecting the file
    #[arg(long)]
    allow_self_loops: bool,
}

#[derive(Args, Debug, Clone)]
struct KernelOpts {
    /// Power-iteration count
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Ridge added to covariance diagonals
    #[arg(long, default_value_t = DEFAULT_RIDGE)]
    ridge: f64,
    /// Closed-form variant
    #[arg(long, value_enum, default_value_t = VariantOpt::Corrected)]
    variant: VariantOpt,
}

impl KernelOpts {
    fn params(&self) -> Result<KernelParams, CliError> {
        if self.k == 0 {
            return Err(CliError::Usage("--k must be at least 1".into()));
        }
        if !(self.ridge >= 0.0) {
            return Err(CliError::Usage("--ridge must be non-negative".into()));
        }
        Ok(KernelParams {
            k: self.k,
            ridge: self.ridge,
            variant: self.variant.into(),
        })
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum VariantOpt {
    Corrected,
    Literal,
}

impl From<VariantOpt> for Variant {
    fn from(value: VariantOpt) -> Self {
        match value {
            VariantOpt::Corrected => Variant::Corrected,
            VariantOpt::Literal => Variant::LiteralEq5,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum FormatOpt {
    Csv,
    Json,
    Svm,
}

impl From<FormatOpt> for ExportFormat {
    fn from(value: FormatOpt) -> Self {
        match value {
            FormatOpt::Csv => ExportFormat::Csv,
            FormatOpt::Json => ExportFormat::Json,
            FormatOpt::Svm => ExportFormat::SvmPrecomputed,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct RunOpts {
    /// Seed for every random draw
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct GramArgs {
    #[command(flatten)]
    source: SourceOpts,
    #[command(flatten)]
    kernel: KernelOpts,
    #[command(flatten)]
    run: RunOpts,
    /// Output base path; files land at <out>.csv/.json/.svm
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Export only this format (default: all three)
    #[arg(long, value_enum)]
    format: Option<FormatOpt>,
    /// Normalize to unit diagonal (for the literal variant)
    #[arg(long)]
    normalize: bool,
    /// Embedding cache file, reused when (k, ridge, graph count) match
    #[arg(long, value_name = "PATH")]
    cache: Option<PathBuf>,
    /// PSD pass threshold: min eigenvalue >= -tol * trace
    #[arg(long, default_value_t = 1e-8)]
    psd_tol: f64,
}

#[derive(Args, Debug)]
struct PerturbArgs {
    #[command(flatten)]
    source: SourceOpts,
    #[command(flatten)]
    kernel: KernelOpts,
    #[command(flatten)]
    run: RunOpts,
    /// Trace CSV output path
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Number of graphs to sample
    #[arg(long, default_value_t = 100)]
    sample: usize,
    /// Cumulative edge flips per graph
    #[arg(long, default_value_t = 20)]
    flips: usize,
}

#[derive(Args, Debug)]
struct InvarianceArgs {
    #[command(flatten)]
    kernel: KernelOpts,
    #[command(flatten)]
    run: RunOpts,
    /// Number of random (graph, permutation) trials
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Optional JSON report path
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    kernel: KernelOpts,
    #[command(flatten)]
    run: RunOpts,
    /// Timing CSV output path
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Target edge counts
    #[arg(long, value_delimiter = ',', default_values_t = [10_000usize, 20_000, 40_000])]
    sizes: Vec<usize>,
    /// Average degree held fixed while n grows
    #[arg(long, default_value_t = 10)]
    avg_degree: usize,
    /// Timing repetitions per size (median kept)
    #[arg(long, default_value_t = 5)]
    repeats: usize,
}

#[derive(Args, Debug)]
struct EmbedDumpArgs {
    #[command(flatten)]
    source: SourceOpts,
    #[command(flatten)]
    kernel: KernelOpts,
    #[command(flatten)]
    run: RunOpts,
    /// Embedding JSON output path
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Also write each graph's summary matrix as CSV into this directory
    #[arg(long, value_name = "DIR")]
    summary_csv: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = dispatch(cli) {
        if !matches!(err, CliError::InvarianceFailed) {
            eprintln!("error: {err}");
        }
        std::process::exit(err.exit_code());
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let workers = match &cli.command {
        Command::Gram(args) => args.run.workers,
        Command::Perturb(args) => args.run.workers,
        Command::Invariance(args) => args.run.workers,
        Command::Bench(args) => args.run.workers,
        Command::EmbedDump(args) => args.run.workers,
    };
    match workers {
        Some(count) => {
            if count == 0 {
                return Err(CliError::Usage("--workers must be positive".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(count)
                .build()
                .map_err(|e| CliError::Usage(e.to_string()))?
                .install(|| run_command(cli))
        }
        None => run_command(cli),
    }
}

fn load(source: &SourceOpts, seed: u64) -> Result<power_kernel::GraphDataset, CliError> {
    resolve_dataset(
        source.dataset.as_deref(),
        source.name.as_deref(),
        source.synthetic,
        source.allow_self_loops,
        seed,
    )
}

fn run_command(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gram(args) => {
            let params = args.kernel.params()?;
            let ds = load(&args.source, args.run.seed)?;
            let formats: Vec<ExportFormat> = match args.format {
                Some(f) => vec![f.into()],
                None => vec![
                    ExportFormat::Csv,
                    ExportFormat::Json,
                    ExportFormat::SvmPrecomputed,
                ],
            };
            let result = run_gram(
                &ds,
                &params,
                args.normalize,
                &args.out,
                &formats,
                args.cache.as_deref(),
                args.psd_tol,
                args.run.seed,
            )?;
            for file in &result.files {
                println!("wrote {}", file.display());
            }
            println!(
                "psd: min_eigenvalue={:.6e} trace={:.6e} pass={}",
                result.psd.min_eigenvalue, result.psd.trace, result.psd.pass
            );
            match result.cv_accuracy {
                Some(acc) => println!(
                    "kernel 1-NN {}-fold accuracy: {:.4} (sanity statistic, not the SVM protocol)",
                    10.min(ds.len()),
                    acc
                ),
                None => println!("kernel 1-NN accuracy: n/a (dataset too small)"),
            }
            Ok(())
        }
        Command::Perturb(args) => {
            let params = args.kernel.params()?;
            let ds = load(&args.source, args.run.seed)?;
            let trace = run_perturbation(&ds, &params, args.sample, args.flips, args.run.seed)?;
            let mut sink = BufWriter::new(File::create(&args.out)?);
            write_trace_csv(&trace, &mut sink)?;
            sink.flush()?;
            println!(
                "wrote {} ({} graphs, {} flips, final mean kernel {:.6})",
                args.out.display(),
                trace.sample_count,
                args.flips,
                trace.final_mean()
            );
            Ok(())
        }
        Command::Invariance(args) => {
            let params = args.kernel.params()?;
            let report = run_invariance_suite(args.trials, params.k, params.ridge, args.run.seed);
            print!("{}", report.render_text());
            if let Some(path) = &args.out {
                let sink = BufWriter::new(File::create(path)?);
                serde_json::to_writer_pretty(sink, &report)
                    .map_err(|e| CliError::Data(e.to_string()))?;
                println!("wrote {}", path.display());
            }
            if report.passed() {
                println!("invariance suite passed");
                Ok(())
            } else {
                eprintln!("invariance suite FAILED");
                Err(CliError::InvarianceFailed)
            }
        }
        Command::Bench(args) => {
            let params = args.kernel.params()?;
            if !args.sizes.windows(2).all(|w| w[0] <= w[1]) {
                return Err(CliError::Usage("--sizes must be ascending".into()));
            }
            let rows = run_scaling_benchmark(
                &args.sizes,
                args.avg_degree,
                args.repeats,
                params.k,
                params.ridge,
                args.run.seed,
            )?;
            let mut sink = BufWriter::new(File::create(&args.out)?);
            write_scaling_csv(&rows, &mut sink)?;
            sink.flush()?;
            for row in &rows {
                println!("E={} n={} median {:.6}s", row.edges, row.nodes, row.wall_time);
            }
            println!("wrote {}", args.out.display());
            Ok(())
        }
        Command::EmbedDump(args) => {
            let params = args.kernel.params()?;
            let ds = load(&args.source, args.run.seed)?;
            let embeddings = power_kernel::compute_embeddings(&ds, &params)?;
            let cache = power_kernel::EmbeddingCache::from_embeddings(&embeddings, &params);
            cache
                .write(&args.out)
                .map_err(|e| CliError::Data(e.to_string()))?;
            println!("wrote {} ({} embeddings)", args.out.display(), ds.len());
            if let Some(dir) = &args.summary_csv {
                std::fs::create_dir_all(dir)?;
                for (index, graph) in ds.graphs.iter().enumerate() {
                    let summary = power_kernel::power_summary(graph, params.k)?;
                    let path = dir.join(format!("summary_{index:05}.csv"));
                    let mut sink = BufWriter::new(File::create(&path)?);
                    for i in 0..summary.node_count() {
                        let row: Vec<String> =
                            summary.row(i).iter().map(|v| v.to_string()).collect();
                        writeln!(sink, "{}", row.join(","))?;
                    }
                }
                println!("wrote {} summary files under {}", ds.len(), dir.display());
            }
            Ok(())
        }
    }
}
