//! `dialect-id`: corpus synthesis, feature extraction, training and
//! evaluation from the command line.
//!
//! Exit status is 0 on success, 1 when a command fails on its inputs and 2
//! on a usage error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dialect_id::features::FeatureGroup;
use dialect_id::synth::Profile;

#[derive(Parser)]
#[command(name = "dialect-id", version, about = "Vowel-based dialect identification")]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with known ground truth.
    SynthCorpus(SynthArgs),
    /// Extract the 33 vowel features of every annotated vowel.
    Extract(ExtractArgs),
    /// Split 80:20, train a forest on the training part and save it.
    Train(TrainArgs),
    /// Evaluate a saved model on the held-out rows of its split.
    Evaluate(EvaluateArgs),
    /// Cross-validated grid search over trees and features per split.
    GridSearch(GridArgs),
    /// Vowel distribution, vowel-space means and dataset summary.
    Report(ReportArgs),
    /// Feature importances of a saved model.
    Importance(ImportanceArgs),
}

#[derive(Args)]
pub struct SynthArgs {
    /// separated, overlapped or identical.
    #[arg(long, default_value = "separated")]
    pub profile: Profile,
    #[arg(long, default_value_t = 15)]
    pub speakers: usize,
    #[arg(long, default_value_t = 24)]
    pub vowels_per_speaker: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Annotation tier holding the vowel labels.
    #[arg(long)]
    pub tier: Option<String>,
    /// `label=vowel` alias table.
    #[arg(long)]
    pub aliases: Option<PathBuf>,
    /// Features CSV to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ForestFlags {
    #[arg(long)]
    pub n_estimators: Option<usize>,
    #[arg(long)]
    pub max_features: Option<usize>,
    #[arg(long)]
    pub min_samples_split: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Train every tree on all rows instead of a bootstrap sample.
    #[arg(long)]
    pub no_bootstrap: bool,
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// spectral, prosodic or all.
    #[arg(long, default_value = "all")]
    pub group: FeatureGroup,
    #[command(flatten)]
    pub forest: ForestFlags,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Model JSON to write; the split record goes next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// Split record; defaults to the one saved next to the model.
    #[arg(long)]
    pub split: Option<PathBuf>,
    /// Write the confusion matrix as CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write raw counts instead of the row-normalized matrix.
    #[arg(long)]
    pub counts: bool,
}

#[derive(Args)]
pub struct GridArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value = "all")]
    pub group: FeatureGroup,
    #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
    pub n_estimators: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "4,6,12")]
    pub max_features: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the CV table as CSV here.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Train the winning cell on the training part and save it here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Directory for vowel_distribution.csv, vowel_space.csv and summary.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ImportanceArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Write `feature,importance` CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config::PipelineConfig::load(cli.config.as_deref()).and_then(|cfg| match cli.command {
        Command::SynthCorpus(a) => commands::synth_corpus(&cfg, a),
        Command::Extract(a) => commands::extract(&cfg, a),
        Command::Train(a) => commands::train(&cfg, a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::GridSearch(a) => commands::grid_search(&cfg, a),
        Command::Report(a) => commands::report(a),
        Command::Importance(a) => commands::importance(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
