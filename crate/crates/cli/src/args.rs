//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "respclass", version, about = "Responder classification from randomized experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic dataset and its ground truth.
    Simulate(SimulateArgs),
    /// Fit a responder classifier and save it.
    Train(TrainArgs),
    /// Score a saved model on a dataset.
    Evaluate(EvaluateArgs),
    /// Run a replicated benchmark described by a config file.
    Benchmark(BenchmarkArgs),
    /// Studentized bootstrap intervals for the linear generative model.
    Bootstrap(BootstrapArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Linear,
    Rbf,
}

/// How dataset CSVs are read.
#[derive(Clone, Debug, Args)]
pub struct InputArgs {
    /// Accept 0/1 treatment and outcome columns (0 means -1).
    #[arg(long)]
    pub zero_one_labels: bool,
    /// Treatment probability when the file has no `e` column.
    #[arg(long, default_value_t = 0.5)]
    pub propensity: f64,
}

/// Optimizer flags for the network learners; unset flags keep the defaults.
#[derive(Clone, Debug, Default, Args)]
pub struct OptimizerArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Minibatch size; 0 trains full-batch.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Squared-parameter penalty.
    #[arg(long)]
    pub l2: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// linear or spherical.
    #[arg(long)]
    pub scenario: String,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "data.csv")]
    pub out: PathBuf,
    /// Ground-truth CSV; defaults to `<out>` with extension `truth.csv`.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Learner name; `respsvm` picks the kernel from `--kernel`.
    #[arg(long)]
    pub learner: String,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    /// A value in [0, 1] or `balanced`.
    #[arg(long, default_value = "0.5")]
    pub theta: String,
    #[arg(long, default_value = "model.txt")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    /// SVM box scale; repeat to search a grid.
    #[arg(long = "c")]
    pub c: Vec<f64>,
    /// RBF width; repeat to search a grid.
    #[arg(long = "gamma")]
    pub gamma: Vec<f64>,
    /// Cross-validation folds for the SVM grid.
    #[arg(long, default_value_t = 5)]
    pub cv: usize,
    /// SVM KKT tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// SVM pair-update budget.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// SVM kernel cache size in MiB.
    #[arg(long)]
    pub cache_mb: Option<usize>,
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// A value in [0, 1] or `balanced` (estimated from `--data`).
    #[arg(long, default_value = "0.5")]
    pub theta: String,
    /// Ground-truth CSV for the same units; adds oracle accuracy columns.
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    /// Scenario that generated the ground truth (needed for the Bayes rule).
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long, default_value = "metrics.csv")]
    pub out: PathBuf,
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "benchmark")]
    pub out_dir: PathBuf,
    /// Worker threads (capped by RESPCLASS_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub outer: usize,
    #[arg(long, default_value_t = 50)]
    pub inner: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    /// Refit every resample from scratch instead of from the full-data fit.
    #[arg(long)]
    pub cold_start: bool,
    #[arg(long, default_value = "ci.csv")]
    pub out: PathBuf,
    /// Worker threads (capped by RESPCLASS_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub input: InputArgs,
}
