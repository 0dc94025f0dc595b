//! Experiment drivers behind the `powerkern` binary: dataset resolution,
//! the perturbation study, the invariance suite, the scaling benchmark
//! and Gram production.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub mod gram_run;
pub mod invariance;
pub mod perturb;
pub mod scaling;
pub mod source;

/// Every random draw comes from one user seed plus a purpose-specific
/// stream, so parallel scheduling and graph order cannot change results.
pub mod streams {
    pub const GENERATE: u64 = 1 << 32;
    pub const SAMPLE: u64 = 2 << 32;
    pub const FLIP: u64 = 3 << 32;
    pub const CROSS_VALIDATION: u64 = 4 << 32;
    pub const TRIAL: u64 = 5 << 32;
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// CLI failure classes, mapped to the exit-code contract: 1 usage,
/// 2 data, 3 invariance-suite failure.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    InvarianceFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::InvarianceFailed => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Data(msg) => write!(f, "{msg}"),
            CliError::InvarianceFailed => write!(f, "invariance suite failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<power_kernel::Error> for CliError {
    fn from(err: power_kernel::Error) -> Self {
        CliError::Data(render_chain(&err))
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

/// Flattens an error and its sources into one line.
pub fn render_chain(err: &dyn std::error::Error) -> String {
    let mut text = err.to_string();
    let mut source = err.source();
    while let Some(inner) = source {
        text.push_str(": ");
        text.push_str(&inner.to_string());
        source = inner.source();
    }
    text
}
