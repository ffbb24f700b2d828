mod commands;
mod config;
mod error;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use skewguard::dataio::ScalingMode;
use skewguard::mcd::{McdConfig, StartPlan};
use skewguard::resample::{Method, OversampleConfig, SmoothingN};
use skewguard::simbench::Arm;

use crate::error::{CliError, EXIT_USAGE};

/// Robust minority oversampling (robROSE, ROSE, SMOTE), evaluation and the
/// simulation benchmark.
///
/// Any subcommand flag may also be given in a flat `key = value` file passed
/// with --config; flags on the command line override the file. The
/// SKEWGUARD_THREADS environment variable caps the number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "skewguard", version, args_override_self = true)]
struct Cli {
    /// Flat `key = value` file with defaults for the subcommand's flags [default: none]
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rebalance a CSV by adding synthetic minority rows
    Oversample(OversampleArgs),
    /// Fit logistic regression on (optionally rebalanced) training data and score test data
    Evaluate(EvaluateArgs),
    /// Run the simulation benchmark and write its report
    Bench(BenchArgs),
    /// Write the train and test partitions of one simulated repetition
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
struct KernelOpts {
    /// Final minority size as a multiple of the original minority count
    #[arg(long, default_value_t = 10.0)]
    target: f64,
    /// Kernel shrink constant h
    #[arg(long, default_value_t = 0.5)]
    h: f64,
    /// Probability of the chi-square outlier cutoff used by robrose
    #[arg(long, default_value_t = 0.999)]
    cutoff_prob: f64,
    /// Number of SMOTE neighbours
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Row count entering the smoothing constant (minority, total)
    #[arg(long, default_value = "minority")]
    smoothing_n: SmoothingN,
    /// Random elemental starts for FastMCD
    #[arg(long, default_value_t = 500)]
    mcd_starts: usize,
    /// Use the raw MCD estimate instead of the reweighted one [default: false]
    #[arg(long)]
    mcd_raw: bool,
}

impl KernelOpts {
    fn to_config(&self, seed: u64) -> Result<OversampleConfig, CliError> {
        let cfg = OversampleConfig {
            multiplier: self.target,
            h: self.h,
            cutoff_prob: self.cutoff_prob,
            k: self.k,
            smoothing_n: self.smoothing_n,
            mcd: McdConfig {
                starts: StartPlan::Random(self.mcd_starts),
                reweight: !self.mcd_raw,
                ..McdConfig::default()
            },
            seed,
        };
        cfg.validate()?;
        if self.mcd_starts == 0 {
            return Err(CliError::Usage("--mcd-starts must be positive".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
struct InputOpts {
    /// Name of the 0/1 label column (matched case-insensitively if no exact match)
    #[arg(long, default_value = "class")]
    label: String,
    /// Comma-separated categorical columns, carried over from seed rows [default: none]
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, num_args = 1)]
    categorical: Vec<String>,
    /// Feature scaling applied before resampling (none, standard, robust)
    #[arg(long, default_value = "none")]
    scaling: ScalingMode,
}

#[derive(Debug, Args)]
struct OversampleArgs {
    /// Input CSV with a label column
    input: PathBuf,
    /// Output CSV
    output: PathBuf,
    /// Oversampler (smote, rose, robrose)
    #[arg(long, default_value = "robrose")]
    method: Method,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Leave out the `synthetic` provenance column [default: false]
    #[arg(long)]
    no_provenance: bool,
    #[command(flatten)]
    input_opts: InputOpts,
    #[command(flatten)]
    kernel: KernelOpts,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Training CSV [default: none]
    #[arg(long, value_name = "PATH", requires = "test", conflicts_with = "data")]
    train: Option<PathBuf>,
    /// Test CSV with the same columns as the training CSV [default: none]
    #[arg(long, value_name = "PATH", requires = "train")]
    test: Option<PathBuf>,
    /// Single CSV evaluated by repeated stratified cross-validation [default: none]
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
    /// Cross-validation folds (with --data)
    #[arg(long, default_value_t = 2)]
    cv_folds: usize,
    /// Cross-validation repeats (with --data)
    #[arg(long, default_value_t = 5)]
    cv_repeats: usize,
    /// Oversampler applied to the training part (none, smote, rose, robrose)
    #[arg(long, default_value = "none")]
    method: Arm,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated numeric columns to drop [default: none]
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, num_args = 1)]
    drop: Vec<String>,
    /// Comma-separated numeric columns replaced by ln(1 + x) [default: none]
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, num_args = 1)]
    log1p: Vec<String>,
    /// Score threshold for the confusion-matrix statistics
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Ridge penalty on the logistic slopes
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
    /// IRLS iteration cap
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Directory receiving roc.csv and pr.csv [default: none]
    #[arg(long, value_name = "DIR")]
    curves: Option<PathBuf>,
    /// Also write the metrics table to this file [default: none]
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    #[command(flatten)]
    input_opts: InputOpts,
    #[command(flatten)]
    kernel: KernelOpts,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated simulation settings (1 clean, 2 contaminated)
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, num_args = 1, default_value = "2")]
    setting: Vec<u8>,
    /// Comma-separated majority counts
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, num_args = 1, default_value = "900")]
    n0: Vec<usize>,
    /// Comma-separated dimensions
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, num_args = 1, default_value = "10")]
    p: Vec<usize>,
    /// Minority count
    #[arg(long, default_value_t = 100)]
    n1: usize,
    /// Repetitions per grid point
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// Training fraction of the stratified split
    #[arg(long, default_value_t = 0.7)]
    split: f64,
    /// Outlier fraction of the training minority rows [default: 0 for setting 1, 0.1 for setting 2]
    #[arg(long)]
    contamination: Option<f64>,
    /// Comma-separated arms (imbalanced, smote, rose, robrose)
    #[arg(
        long,
        value_delimiter = ',',
        action = clap::ArgAction::Set,
        num_args = 1,
        default_value = "imbalanced,smote,rose,robrose"
    )]
    methods: Vec<Arm>,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report CSV (setting,n0,method,metric,mean,se,n_excluded)
    #[arg(long, default_value = "bench.csv")]
    csv: PathBuf,
    /// Plain-text report tables, also printed to stdout
    #[arg(long, default_value = "bench.txt")]
    table: PathBuf,
    /// Per-repetition AUC and AUPRC CSV [default: none]
    #[arg(long, value_name = "PATH")]
    per_rep: Option<PathBuf>,
    #[command(flatten)]
    kernel: KernelOpts,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Training partition CSV
    train_out: PathBuf,
    /// Test partition CSV
    test_out: PathBuf,
    /// Simulation setting (1 clean, 2 contaminated)
    #[arg(long, default_value_t = 2)]
    setting: u8,
    /// Dimension
    #[arg(long, default_value_t = 10)]
    p: usize,
    /// Majority count
    #[arg(long, default_value_t = 900)]
    n0: usize,
    /// Minority count
    #[arg(long, default_value_t = 100)]
    n1: usize,
    /// Training fraction of the stratified split
    #[arg(long, default_value_t = 0.7)]
    split: f64,
    /// Outlier fraction of the training minority rows [default: 0 for setting 1, 0.1 for setting 2]
    #[arg(long)]
    contamination: Option<f64>,
    /// Repetition index; matches the benchmark's data for the same seed
    #[arg(long, default_value_t = 0)]
    rep: usize,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SKEWGUARD_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("SKEWGUARD_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))
}

fn run(args: Vec<OsString>) -> Result<(), CliError> {
    let args = config::expand(args, &Cli::command())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ")
                .to_string();
            return Err(CliError::Usage(first));
        }
    };
    init_threads()?;
    match cli.command {
        Command::Oversample(a) => commands::oversample(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::Simulate(a) => commands::simulate(&a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(EXIT_USAGE as u8))
        }
    }
}
