//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when some sentences failed to simulate,
//! 2 for unusable input or configuration.

mod commands;
mod specs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use specs::{parse_delays, parse_processor, parse_prophecy};

use crate::trace::{LabelScheme, TaskKind};

#[derive(Debug, Parser)]
#[command(name = "diachron", version, about = "Evaluate and simulate incremental sequence processors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a labeler on every prefix of every corpus sentence and write traces.
    Simulate(SimulateArgs),
    /// Score a trace file: EO, CT and RC per delay, gold scores and EO curves.
    Evaluate(EvaluateArgs),
    /// Cut each corpus sentence at a random length (seeded).
    Truncate(TruncateArgs),
    /// Print the edit scripts of one sequence, step by step.
    Diff(DiffArgs),
    /// Corpus BLEU of prophecies against the real sentence continuations.
    ProphecyEval(ProphecyEvalArgs),
    /// Train an n-gram prophecy model on a corpus.
    TrainNgram(TrainNgramArgs),
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub task: TaskKind,
    /// `lookup:MAP.tsv`, `window:RULES.toml` or `external:COMMAND|tcp://HOST:PORT`
    #[arg(long)]
    pub processor: String,
    /// `none`, `repeat-last`, `ngram:MODEL` or `external:COMMAND|tcp://HOST:PORT`
    #[arg(long, default_value = "none")]
    pub prophecy: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to `<out>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Label for tokens missing from a lookup table.
    #[arg(long, default_value = "O")]
    pub default_label: String,
    /// Longest n-gram prophecy, in tokens.
    #[arg(long, default_value_t = crate::simulator::DEFAULT_MAX_CONTINUATION)]
    pub max_continuation: usize,
    /// Per-call timeout for external endpoints, in seconds.
    #[arg(long, default_value_t = 30.0)]
    pub timeout: f64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, clap::Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub traces: PathBuf,
    /// Comma-separated delays, e.g. `0,1,2`.
    #[arg(long, default_value = "0,1,2", value_delimiter = ',', value_parser = parse_delays)]
    pub delays: Vec<crate::trace::Delay>,
    /// Report JSON path; printed to stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Gold corpus aligned with the traces (overrides gold stored in traces).
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Label scheme of the gold labels; detected when absent.
    #[arg(long)]
    pub scheme: Option<LabelScheme>,
    /// EO-over-time curves CSV (`step,group,mean_eo,support`); needs gold.
    #[arg(long)]
    pub curves: Option<PathBuf>,
    /// Summary table CSV (`metric,delay,value`).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct TruncateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub task: TaskKind,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct DiffArgs {
    #[arg(long)]
    pub traces: PathBuf,
    /// Sequence id; the first trace when absent.
    #[arg(long)]
    pub sequence: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub delay: usize,
}

#[derive(Debug, clap::Args)]
pub struct ProphecyEvalArgs {
    /// Lines of `prophecy<TAB>reference`, tokens separated by spaces.
    #[arg(long, conflicts_with_all = ["corpus", "prophecy"])]
    pub pairs: Option<PathBuf>,
    /// Corpus whose prefixes are continued with `--prophecy`.
    #[arg(long, requires = "prophecy")]
    pub corpus: Option<PathBuf>,
    #[arg(long, default_value = "tagging")]
    pub task: TaskKind,
    #[arg(long)]
    pub prophecy: Option<String>,
    #[arg(long, default_value_t = crate::simulator::DEFAULT_MAX_CONTINUATION)]
    pub max_continuation: usize,
    #[arg(long, default_value_t = 30.0)]
    pub timeout: f64,
    /// Also write the generated pairs to this file.
    #[arg(long)]
    pub write_pairs: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct TrainNgramArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub task: TaskKind,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },
    #[error("{failed} of {total} sentences failed; see {}", manifest.display())]
    SentenceFailures { failed: usize, total: usize, manifest: PathBuf },
}

impl CliError {
    pub fn input(path: &std::path::Path, message: impl ToString) -> Self {
        CliError::Input { path: path.to_path_buf(), message: message.to_string() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::SentenceFailures { .. } => 1,
            CliError::Usage(_) | CliError::Input { .. } => 2,
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => commands::simulate(&args),
        Command::Evaluate(args) => commands::evaluate(&args),
        Command::Truncate(args) => commands::truncate(&args),
        Command::Diff(args) => commands::diff(&args),
        Command::ProphecyEval(args) => commands::prophecy_eval(&args),
        Command::TrainNgram(args) => commands::train_ngram(&args),
    }
}

pub fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
