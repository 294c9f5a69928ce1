use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};

/// Frequency-transmission analysis and NARX identification for two-channel
/// stimulus/response recordings.
#[derive(Debug, Parser)]
#[command(name = "mycosig", version, about, propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub shared: Shared,

    #[command(subcommand)]
    pub command: Command,
}

/// Flags accepted by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Shared {
    /// Output directory (created if missing)
    #[arg(long, global = true, default_value = ".", value_name = "DIR")]
    pub out: PathBuf,

    /// Base seed for anything random
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    pub seed: u64,

    /// Worker threads; 0 uses every logical core
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    pub workers: usize,

    /// Significance level for the hypothesis tests
    #[arg(long, global = true, default_value_t = 0.05, value_name = "P")]
    pub alpha: f64,

    /// Welch segment length in samples
    #[arg(
        long = "welch-seg",
        global = true,
        default_value_t = 10_000,
        value_name = "N"
    )]
    pub welch_seg: usize,

    /// Welch segment overlap as a fraction of the segment
    #[arg(
        long = "welch-overlap",
        global = true,
        default_value_t = 0.5,
        value_name = "F"
    )]
    pub welch_overlap: f64,

    /// Also print the primary result (report, model or file list) on stdout
    #[arg(long, global = true)]
    pub stdout: bool,

    /// More log output (-v debug, -vv trace)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Only log warnings and errors
    #[arg(short, long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a square-wave stimulus or a simulated recording corpus
    Generate(GenerateArgs),
    /// Analyze recordings into the per-frequency report
    Analyze(AnalyzeArgs),
    /// Grid-search NARX structures and fit the best one
    Identify(IdentifyArgs),
    /// Drive a NARX channel model and write the resulting recording
    Simulate(SimulateArgs),
    /// Write plot data (excerpt, amplitude spectrum, CSD) for one recording
    Report(ReportArgs),
}

/// Channel options shared by `generate --corpus` and `simulate`.
#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    /// Channel model JSON; defaults to the built-in five-term model
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,

    /// Input coupling term as LAG:GAIN (repeatable)
    #[arg(long, value_name = "LAG:GAIN", default_values_t = vec!["1:0.05".to_string()])]
    pub coupling: Vec<String>,

    /// Drop all input coupling terms
    #[arg(long, conflicts_with = "coupling")]
    pub no_coupling: bool,

    /// Standard deviation of additive output noise, volts
    #[arg(long, default_value_t = 0.0, value_name = "V")]
    pub noise: f64,

    /// Initial output value; defaults to the model's fixed point (or 0)
    #[arg(long, value_name = "V")]
    pub init: Option<f64>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["square", "corpus"])))]
pub struct GenerateArgs {
    /// A single square-wave stimulus file
    #[arg(long)]
    pub square: bool,

    /// A simulated corpus: one recording per frequency and replicate
    #[arg(long)]
    pub corpus: bool,

    /// Stimulus frequency for --square, Hz
    #[arg(long, value_name = "HZ")]
    pub freq: Option<f64>,

    /// Frequencies for --corpus: comma-separated values or START:STOP:STEP ranges
    #[arg(
        long,
        value_name = "LIST",
        default_value = "100:1000:100,1000:10000:1000"
    )]
    pub freqs: String,

    /// Replicates per frequency for --corpus
    #[arg(long, default_value_t = 28, value_name = "N")]
    pub reps: usize,

    /// Duration of each stimulus, seconds
    #[arg(long, default_value_t = 1.0, value_name = "S")]
    pub dur: f64,

    /// Square-wave amplitude, volts
    #[arg(long, default_value_t = 5.0, value_name = "V")]
    pub amp: f64,

    /// Sample rate, Hz
    #[arg(long, default_value_t = 50_000.0, value_name = "HZ")]
    pub rate: f64,

    #[command(flatten)]
    pub channel: ChannelArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Recording CSVs, directories or glob patterns
    #[arg(value_name = "INPUT")]
    pub inputs: Vec<String>,

    /// Declared sample rate, checked against the time column
    #[arg(long, value_name = "HZ")]
    pub rate: Option<f64>,

    /// Input frequency for recordings without a metadata sidecar
    #[arg(long, value_name = "HZ")]
    pub freq: Option<f64>,

    /// Largest lag searched when choosing the Granger lag
    #[arg(long, default_value_t = 30, value_name = "N")]
    pub granger_lag_cap: usize,

    /// Fixed ADF maximum lag (default: 12·(n/100)^¼)
    #[arg(long, value_name = "N")]
    pub adf_max_lag: Option<usize>,

    /// Skip writing per-recording CSD files
    #[arg(long)]
    pub no_spectra: bool,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    /// Training recordings: CSVs, directories or glob patterns
    #[arg(value_name = "INPUT")]
    pub inputs: Vec<String>,

    /// Validation recordings (default: none)
    #[arg(long, value_name = "INPUT", num_args = 1..)]
    pub validation: Vec<String>,

    /// Only use recordings with this input frequency
    #[arg(long, value_name = "HZ")]
    pub freq: Option<f64>,

    /// Grid cell KIND:DEGREE:TERMS[:els] (repeatable; default: full grid)
    #[arg(long, value_name = "CELL")]
    pub grid: Vec<String>,

    /// Lag rule: xcorr, acf or fixed:NY:NX
    #[arg(long, default_value = "xcorr", value_name = "RULE")]
    pub lags: String,

    /// Cap on data-driven lags
    #[arg(long, default_value_t = 30, value_name = "N")]
    pub lag_cap: usize,

    /// Leading fraction of each recording used for fitting
    #[arg(long, default_value_t = 0.8, value_name = "F")]
    pub train_fraction: f64,

    /// Input delay d: input lags start at x(k-d)
    #[arg(long, default_value_t = 1, value_name = "N")]
    pub delay: usize,

    /// Maximum extended-least-squares iterations
    #[arg(long, default_value_t = 20, value_name = "N")]
    pub els_iterations: usize,

    /// Declared sample rate, checked against the time column
    #[arg(long, value_name = "HZ")]
    pub rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Recording or stimulus CSV whose input column drives the channel;
    /// without it a square wave is generated
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Square-wave frequency when no --input is given, Hz
    #[arg(long, default_value_t = 900.0, value_name = "HZ")]
    pub freq: f64,

    /// Square-wave duration, seconds
    #[arg(long, default_value_t = 1.0, value_name = "S")]
    pub dur: f64,

    /// Square-wave amplitude, volts
    #[arg(long, default_value_t = 5.0, value_name = "V")]
    pub amp: f64,

    /// Sample rate of the generated square wave, Hz
    #[arg(long, default_value_t = 50_000.0, value_name = "HZ")]
    pub rate: f64,

    /// Replicate id of the written recording (default: derived from frequency)
    #[arg(long, value_name = "ID")]
    pub id: Option<String>,

    #[command(flatten)]
    pub channel: ChannelArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Recording CSVs, directories or glob patterns to search
    #[arg(value_name = "INPUT")]
    pub inputs: Vec<String>,

    /// Replicate id of the recording to export
    #[arg(long, value_name = "ID")]
    pub id: String,

    /// Number of leading samples in the time-series excerpt
    #[arg(long, default_value_t = 1000, value_name = "N")]
    pub excerpt: usize,

    /// Declared sample rate, checked against the time column
    #[arg(long, value_name = "HZ")]
    pub rate: Option<f64>,
}
