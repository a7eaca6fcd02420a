use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use varfam_core::induce::Mode;

#[derive(Debug, Parser)]
#[command(name = "varfam", version, about = "Induce spelling-variant families from a JSONL corpus")]
pub struct Cli {
    /// JSON configuration file; missing keys take their defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest a corpus and train embeddings.
    Train(TrainArgs),
    /// Induce, score and write families from a trained model.
    Induce(InduceArgs),
    /// Train and induce in one run.
    Pipeline(PipelineArgs),
    /// Serve families over HTTP for annotation.
    Serve(ServeArgs),
    /// Synthetic benchmark with planted families.
    #[command(subcommand)]
    Bench(BenchCommand),
}

/// Settings that override the configuration file.
#[derive(Debug, Args)]
pub struct Overrides {
    /// Family induction mode.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    /// Seed for every random choice made during training.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training threads; 1 gives byte-identical results across runs.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Resolve and validate the configuration, print it, and stop.
    #[arg(long)]
    pub dry_run: bool,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|_| format!("expected `open` or `strict`, got `{s}`"))
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// JSONL corpus; overrides `corpus` in the configuration.
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    /// Output directory; overrides `out` in the configuration.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Model file [default: <out>/model.bin].
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct InduceArgs {
    /// Model written by `train`.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Corpus statistics written by `train` [default: stats.json beside the model].
    #[arg(long, value_name = "FILE")]
    pub stats: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Model file [default: <out>/model.bin].
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Families JSONL written by `induce` or `pipeline`.
    #[arg(long, value_name = "FILE")]
    pub families: PathBuf,
    /// Annotation log, created if absent [default: annotations.jsonl beside the families].
    #[arg(long, value_name = "FILE")]
    pub annotations: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Write a synthetic corpus and its ground truth.
    Generate(GenerateArgs),
    /// Score induced families against ground truth.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Directory for corpus.jsonl and truth.json.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub families: Option<usize>,
    #[arg(long)]
    pub min_variants: Option<usize>,
    #[arg(long)]
    pub max_variants: Option<usize>,
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub records: Option<usize>,
    #[arg(long)]
    pub zipf_exponent: Option<f64>,
    #[arg(long)]
    pub distractors: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Families JSONL to evaluate.
    #[arg(long, value_name = "FILE")]
    pub families: PathBuf,
    /// Ground truth written by `bench generate`.
    #[arg(long, value_name = "FILE")]
    pub truth: PathBuf,
    /// Corpus statistics; when given, pairs with a token below `min_count`
    /// or `MIN_LEN` are left out and counted separately.
    #[arg(long, value_name = "FILE")]
    pub stats: Option<PathBuf>,
    /// Write the report here as well as to stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Seed for the random-pairing baseline.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
