//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::archive::ARTIFACT_FORMAT_VERSION;

fn long_version() -> &'static str {
    Box::leak(
        format!(
            "{} (artifact format {ARTIFACT_FORMAT_VERSION}, corpus format {})",
            env!("CARGO_PKG_VERSION"),
            celebprof_core::CORPUS_FORMAT_VERSION
        )
        .into_boxed_str(),
    )
}

#[derive(Debug, Parser)]
#[command(name = "celebprof", version = long_version(), about = "Celebrity profiling from follower tweets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic corpus archive.
    Synth(SynthArgs),
    /// Build a corpus archive from follower exports and a labels file.
    Ingest(IngestArgs),
    /// Clean a corpus archive and report tweet retention.
    Preprocess(PreprocessArgs),
    /// Train every configured model on the training split.
    Train(TrainArgs),
    /// Score trained models on the test split.
    Evaluate(EvaluateArgs),
    /// Ingest or load, clean, train and evaluate in one go.
    Run(RunArgs),
    /// Label new celebrities from their follower exports.
    Predict(PredictArgs),
}

/// Config file plus `key=value` overrides.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Config file of `key = value` lines, or a JSON report to rerun.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one config key, e.g. `--set neural.epochs=10`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub celebrities: usize,
    #[arg(long, default_value_t = 10)]
    pub followers: usize,
    #[arg(long = "min-tweets", default_value_t = 20)]
    pub min_tweets: usize,
    #[arg(long, default_value_t = 2000)]
    pub vocab: usize,
    /// Class signal strength in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub signal: f64,
    #[arg(long = "reference-year", default_value_t = 2022)]
    pub reference_year: i32,
    /// Also write the corpus as follower exports and a labels file.
    #[arg(long)]
    pub export: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Directory with one subdirectory of follower exports per celebrity.
    #[arg(long)]
    pub feeds: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Year against which birth years are turned into ages.
    #[arg(long = "reference-year")]
    pub reference_year: Option<i32>,
    #[arg(long)]
    pub followers: Option<usize>,
    /// Band receiving the boundary ages 40 and 60: lower or upper.
    #[arg(long = "age-boundary")]
    pub age_boundary: Option<String>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Cleaned archive written by `preprocess`.
    #[arg(long)]
    pub clean: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Maximum number of grid cells trained at once.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Write the feature matrices as sparse text.
    #[arg(long = "dump-features")]
    pub dump_features: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub clean: PathBuf,
    /// Directory of models written by `train`.
    #[arg(long)]
    pub models: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Corpus archive to start from.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Follower exports to ingest instead of an archive.
    #[arg(long)]
    pub feeds: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long = "reference-year")]
    pub reference_year: Option<i32>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long = "dump-features")]
    pub dump_features: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model file written by `train`. Repeatable, one per demographic.
    #[arg(long = "model", required = true)]
    pub models: Vec<PathBuf>,
    /// Follower exports of one celebrity, or one subdirectory per celebrity.
    #[arg(long)]
    pub feeds: PathBuf,
    /// Write predictions here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
