//! Command-line front end for the protest-duration pipeline.
//!
//! One executable, five subcommands: descriptive statistics, stemmed
//! word-frequency export, the end-to-end modeling pipeline, single-text
//! prediction against a finished run directory, and a synthetic dataset
//! generator. Exit codes: 0 success, 2 configuration error, 3 data error,
//! 4 stage failure.

mod commands;
mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Errors are sorted into the three non-zero exit codes: problems with the
/// configuration or arguments, problems reading or understanding input data,
/// and failures inside a named pipeline stage.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Stage {
        stage: &'static str,
        message: String,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Stage { .. } => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration: {m}"),
            CliError::Data(m) => write!(f, "data: {m}"),
            CliError::Stage { stage, message } => write!(f, "stage '{stage}' failed: {message}"),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Wrap a core error as a failure of the named stage (exit code 4).
pub fn in_stage<T>(stage: &'static str, result: protestdur_core::Result<T>) -> CliResult<T> {
    result.map_err(|e| CliError::Stage {
        stage,
        message: e.to_string(),
    })
}

/// Wrap a core error as an input-data problem (exit code 3).
pub fn as_data<T>(result: protestdur_core::Result<T>) -> CliResult<T> {
    result.map_err(|e| CliError::Data(e.to_string()))
}

#[derive(Parser)]
#[command(
    name = "protestdur",
    version,
    about = "Predict protest duration from free-text descriptions: \
             LDA topic features into gain-ratio tree ensembles."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

// One instance exists for the life of the process; variant size is moot.
#[allow(clippy::large_enum_variant)]
#[derive(Subcommand)]
enum Command {
    /// Percentage tables by province, issue, state, and duration.
    Stats(StatsArgs),
    /// Export stemmed-token frequencies as CSV.
    ExportWordfreq(WordfreqArgs),
    /// Run the full pipeline into a self-describing run directory.
    Pipeline(PipelineArgs),
    /// Classify one free-text description with a finished run directory.
    Predict(PredictArgs),
    /// Write a schema-compatible synthetic protest CSV.
    GenData(GenDataArgs),
}

#[derive(Args)]
pub struct StatsArgs {
    /// Protest CSV to summarize.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory for the CSV copies of the printed tables.
    #[arg(long, default_value = "stats")]
    pub out: PathBuf,
    /// Column holding the free-text description.
    #[arg(long, default_value = "reason")]
    pub text_column: String,
    #[arg(long, default_value = "start_date")]
    pub start_column: String,
    #[arg(long, default_value = "end_date")]
    pub end_column: String,
    /// chrono format for both date columns.
    #[arg(long, default_value = "%Y-%m-%d")]
    pub date_format: String,
}

#[derive(Args)]
pub struct WordfreqArgs {
    /// Protest CSV to tokenize.
    #[arg(long)]
    pub input: PathBuf,
    /// Optional run-config TOML for [data]/[preprocess] settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Keep tokens appearing at least this many times.
    #[arg(long, default_value_t = 25)]
    pub min_count: u64,
    /// Keep at most this many tokens after sorting.
    #[arg(long, default_value_t = 75)]
    pub top: usize,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PipelineArgs {
    /// Run-config TOML; defaults apply for every missing key.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Input protest CSV (overrides [data] input).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Run directory to write (overrides [run] out_dir).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Root seed; every stage seed derives from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; any value gives results identical to --jobs 1.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Fixed topic count (skips the sweep); 0 re-enables the sweep.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub k_step: Option<usize>,
    /// Cross-validation folds for the topic-count sweep.
    #[arg(long)]
    pub sweep_folds: Option<usize>,
    /// Gibbs sweeps for training (sweep cells and the final fit).
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Document-topic prior; 0 means the 50/k default.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Topic-word prior.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Class-balance strategy (oversample_minority, undersample_majority,
    /// both_to_majority, both_to_midpoint).
    #[arg(long)]
    pub balance: Option<String>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Balance the full table before splitting (the published arithmetic);
    /// oversampled copies of one document may then land on both sides.
    #[arg(long)]
    pub paper_order: bool,
    /// Comma-separated learner list (single_tree, bagged, forest).
    #[arg(long, value_delimiter = ',')]
    pub learners: Option<Vec<String>>,
    #[arg(long)]
    pub cv_folds: Option<usize>,
    #[arg(long)]
    pub cv_repeats: Option<usize>,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Finished pipeline run directory.
    #[arg(long)]
    pub run_dir: PathBuf,
    /// Which fitted model to use; default is the run's primary model.
    #[arg(long)]
    pub learner: Option<String>,
    /// Free-text protest description.
    pub text: String,
}

#[derive(Args)]
pub struct GenDataArgs {
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Total data rows, incomplete ones included.
    #[arg(long, default_value_t = 876)]
    pub rows: usize,
    /// Rows corrupted so ingestion must drop them.
    #[arg(long, default_value_t = 3)]
    pub incomplete: usize,
    /// Fraction of duration assignments shuffled away from the text signal.
    #[arg(long, default_value_t = 0.35)]
    pub label_noise: f64,
    #[arg(long, default_value_t = 20130201)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Stats(args) => commands::stats(&args),
        Command::ExportWordfreq(args) => commands::export_wordfreq(&args),
        Command::Pipeline(args) => pipeline::run(&args),
        Command::Predict(args) => commands::predict(&args),
        Command::GenData(args) => commands::gen_data(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
