use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gridcast::data::{DEFAULT_COUPLING, DEFAULT_PERIOD, DEFAULT_TRAIN_FRACTION};
use gridcast::forecaster::DEFAULT_LAG;
use gridcast::training::{DEFAULT_BATCH_SIZE, DEFAULT_EPOCHS};

#[derive(Debug, Parser)]
#[command(name = "gridcast", version, about = "Next-step forecasting of bus voltage magnitudes and angles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic grid-state dataset.
    GenData(GenDataArgs),
    /// Train a forecaster on a dataset.
    Train(TrainArgs),
    /// Score a trained model on the test partition of a dataset.
    Eval(EvalArgs),
    /// Forecast one instance of a dataset.
    Forecast(ForecastArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GenDataArgs {
    #[arg(long, default_value_t = 14)]
    pub buses: usize,
    /// Number of instances.
    #[arg(long, default_value_t = 2000)]
    pub length: usize,
    /// Samples per daily cycle.
    #[arg(long, default_value_t = DEFAULT_PERIOD)]
    pub period: usize,
    /// Multiplier applied to the default noise levels (0 gives a clean series).
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    /// Share of the upstream bus's angle swing added to each bus.
    #[arg(long, default_value_t = DEFAULT_COUPLING)]
    pub coupling: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineArg {
    Hybrid,
    RnnOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchArg {
    Cnn,
    Rnn,
}

/// Optimizer and schedule flags shared by `train` and retraining in `eval`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainingFlags {
    #[arg(long, default_value_t = DEFAULT_EPOCHS)]
    pub epochs: usize,
    #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TRAIN_FRACTION)]
    pub train_fraction: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Number of lagged states fed to the model.
    #[arg(long, default_value_t = DEFAULT_LAG)]
    pub lag: usize,
    #[arg(long)]
    pub model_out: PathBuf,
    /// Training report path; defaults to `<model-out stem>.report.json`.
    #[arg(long)]
    pub report_out: Option<PathBuf>,
    #[command(flatten)]
    pub training: TrainingFlags,
    /// Keep one branch at its initial parameters.
    #[arg(long, value_enum)]
    pub freeze_branch: Option<BranchArg>,
    #[arg(long, value_enum, default_value_t = BaselineArg::Hybrid)]
    pub baseline: BaselineArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompareArg {
    Persistence,
    Hybrid,
    RnnOnly,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Text report with the error table.
    #[arg(long)]
    pub report_out: PathBuf,
    /// Same report as JSON.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
    /// Per-instance, per-bus absolute errors as CSV.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// Independent retrain-and-evaluate runs; 1 scores the given model only.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// Extra rows for the comparison table, comma separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub compare: Vec<CompareArg>,
    /// Flags for every model trained by this command.
    #[command(flatten)]
    pub training: TrainingFlags,
    /// Export every bus at this test instance (1-based) to `--instance-out`.
    #[arg(long, requires = "instance_out")]
    pub slice_instance: Option<usize>,
    #[arg(long, requires = "slice_instance")]
    pub instance_out: Option<PathBuf>,
    /// Export one bus (1-based) over test instances to `--bus-out`.
    #[arg(long, requires = "bus_out")]
    pub slice_bus: Option<usize>,
    /// Inclusive test-instance range for `--slice-bus`, as `FIRST..LAST`.
    #[arg(long, requires = "slice_bus")]
    pub slice_range: Option<String>,
    #[arg(long, requires = "slice_bus")]
    pub bus_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ForecastArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// 1-based index of the instance to forecast; the preceding `lag`
    /// instances form the input. May be one past the end of the series.
    #[arg(long)]
    pub at_instance: usize,
    /// CSV output; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Repeat the last observed state instead of running the model.
    #[arg(long)]
    pub persistence: bool,
}
