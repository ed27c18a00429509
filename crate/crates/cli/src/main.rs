mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use tempo_core::event_model::TimexMode;
use tempo_core::ReferenceAnchor;

/// Timex generation, timex embeddings and event ordering experiments.
#[derive(Debug, Parser)]
#[command(name = "tempo", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed; overrides the seed in --config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON config for the subcommand; missing fields take defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (a file for distant-label and templates).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Reference date for relative timexes.
    #[arg(long, global = true, value_name = "YYYY-MM-DD", value_parser = parse_anchor)]
    pub anchor: Option<ReferenceAnchor>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate labelled timex pairs.
    GenPairs {
        #[arg(long, default_value_t = 50_000)]
        n: usize,
        /// Share of pairs drawn from explicit datetime templates.
        #[arg(long, default_value_t = 0.75)]
        explicit_fraction: f64,
    },
    /// Generate the synthetic event ordering corpus.
    GenEvents {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Train the character-level timex pair classifier.
    TrainTimex {
        #[arg(long, value_name = "PAIRS")]
        train: PathBuf,
        #[arg(long, value_name = "PAIRS")]
        dev: PathBuf,
    },
    /// Score a timex model on labelled pairs.
    EvalTimex {
        #[arg(long, value_name = "CKPT")]
        model: PathBuf,
        #[arg(long, value_name = "PAIRS")]
        test: PathBuf,
    },
    /// Print the embedding of each timex surface, one line per surface.
    Embed {
        #[arg(long, value_name = "CKPT")]
        model: PathBuf,
        #[arg(required = true)]
        surfaces: Vec<String>,
    },
    /// Train the dependency-path event ordering model.
    TrainEvents {
        #[arg(long, value_name = "DOCS")]
        train: PathBuf,
        #[arg(long, value_name = "DOCS")]
        dev: PathBuf,
        #[command(flatten)]
        model: EventArgs,
    },
    /// Score an event model and write per-pair predictions.
    EvalEvents {
        #[arg(long, value_name = "CKPT")]
        model: PathBuf,
        #[arg(long, value_name = "DOCS")]
        test: PathBuf,
        /// Timex checkpoint; defaults to the one recorded at training time.
        #[arg(long, value_name = "CKPT")]
        timex: Option<PathBuf>,
    },
    /// Replace document pairs with rule-based distant labels.
    DistantLabel {
        #[arg(long = "in", value_name = "DOCS")]
        input: PathBuf,
    },
    /// Print the interval a timex resolves to.
    Normalize { surface: String },
    /// Paired bootstrap test between two prediction files.
    Significance {
        #[arg(long, value_name = "PREDS")]
        a: PathBuf,
        #[arg(long, value_name = "PREDS")]
        b: PathBuf,
        #[arg(long, default_value_t = tempo_core::experiments::DEFAULT_RESAMPLES)]
        resamples: usize,
    },
    /// Dump the built-in timex templates as JSON.
    Templates,
    /// Train and score event models over train sizes, modes and seeds.
    LearningCurve {
        #[arg(long, value_name = "DOCS")]
        pool: PathBuf,
        #[arg(long, value_name = "DOCS")]
        dev: PathBuf,
        #[arg(long, value_name = "DOCS")]
        test: PathBuf,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[command(flatten)]
        model: EventArgs,
    },
}

#[derive(Debug, Args)]
pub struct EventArgs {
    /// Timex input mode; learning-curve accepts a comma list.
    #[arg(long, value_delimiter = ',', value_parser = parse_mode)]
    pub mode: Vec<TimexMode>,
    /// Feed word and tag vectors straight to the path encoder.
    #[arg(long)]
    pub baseline_no_lower_bilstm: bool,
    /// Frozen timex checkpoint for with-mode.
    #[arg(long, value_name = "CKPT")]
    pub timex: Option<PathBuf>,
}

fn parse_anchor(s: &str) -> Result<ReferenceAnchor, String> {
    ReferenceAnchor::parse_iso(s).ok_or_else(|| format!("{s:?} is not a date in 1900-01-01..2049-12-31"))
}

fn parse_mode(s: &str) -> Result<TimexMode, String> {
    TimexMode::parse(s).ok_or_else(|| format!("{s:?} is not one of with, without, masked"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tempo: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}

