//! `miplab`: measures, mechanism payments, verification suites and sweeps from the command line.
//!
//! Exit codes: 0 success or passing suite, 1 mechanism error record or suite
//! violations, 2 configuration error (bad flags, unreadable or malformed input).

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "miplab", version, about = "Information-monotone peer prediction laboratory")]
pub struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, env = "MIPLAB_OUT_DIR", default_value = ".")]
    pub out: PathBuf,

    /// Worker threads; output does not depend on this.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a mutual-information measure on a joint or conditional tensor.
    Measure(MeasureArgs),
    /// Compute a mechanism's per-agent payments.
    Mechanism(MechanismArgs),
    /// Run a verification suite and write its verdict.
    Verify(VerifyArgs),
    /// Write a long-format convergence table.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// kl, tvd, chi2, hellinger, bmi-log or bmi-quadratic.
    #[arg(long)]
    pub mi: String,
    #[arg(long)]
    pub joint: PathBuf,
    /// Treat the input as a (Z, X, Y) tensor and report MI(X; Y | Z).
    #[arg(long)]
    pub conditional: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismName {
    Fmi,
    Bmi,
    Md,
    Ca,
    Sppm,
    Bts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct MechanismArgs {
    #[arg(long)]
    pub mechanism: MechanismName,
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Measure or scoring rule: an f generator for fmi, a rule for bmi, sppm and bts.
    #[arg(long)]
    pub measure: Option<String>,
    /// Expected payments instead of a sampled run.
    #[arg(long, conflicts_with = "questions")]
    pub exact: bool,
    /// Number of sampled questions.
    #[arg(long)]
    pub questions: Option<usize>,
    /// Use these reports instead of sampling from the scenario.
    #[arg(long, conflicts_with_all = ["exact", "questions"])]
    pub reports: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// all-pairs or random-reference.
    #[arg(long, default_value = "all-pairs")]
    pub pairing: String,
    /// Size of the comparison sets of the agreement mechanisms.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long)]
    pub bts_profile: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// Additive smoothing of BTS frequencies.
    #[arg(long)]
    pub smoothing: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub suite: String,
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',')]
    pub alphabet_sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub agent_counts: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    FmiT,
    BtsN,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub kind: SweepKind,
    /// Comma-separated grid of T or n values; may be empty.
    #[arg(long, default_value = "")]
    pub grid: String,
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.jobs {
        Some(0) => {
            eprintln!("error: --jobs must be at least 1");
            2
        }
        Some(jobs) => match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(|| commands::run(&cli)),
            Err(e) => {
                eprintln!("error: cannot start worker pool: {e}");
                2
            }
        },
        None => commands::run(&cli),
    };
    ExitCode::from(code)
}
