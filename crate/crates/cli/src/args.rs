use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "popbench", version, about = "Topic popularity prediction benchmark")]
pub struct Cli {
    /// TOML run configuration; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Master seed for every seeded stage.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus and report topics.
    Ingest(IngestArgs),
    /// Extract the feature matrix for one bucket.
    Features(FeaturesArgs),
    /// Label topics by next-bucket popularity, or copy planted labels.
    Label(LabelArgs),
    /// Train the logistic classifier.
    Train(TrainArgs),
    /// Evaluate by cross validation or with a trained model.
    Eval(EvalArgs),
    /// Rank methods under scenarios by MinDis.
    Rank(RankArgs),
    /// Relative contribution of each feature.
    Ablate(AblateArgs),
    /// Generate a synthetic corpus with its ledger.
    Synth(SynthArgs),
    /// Re-derive the reference weight and ranking tables.
    ReproTables(ReproArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// JSON-lines message files (shards).
    #[arg(long, required = true, num_args = 1..)]
    pub messages: Vec<PathBuf>,
    /// Tab-separated follower edges.
    #[arg(long)]
    pub followers: Option<PathBuf>,
    /// Comma-separated language codes to keep.
    #[arg(long)]
    pub lang: Option<String>,
    /// Bucket length in seconds (default: one day).
    #[arg(long)]
    pub period: Option<i64>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub min_topic_count: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FeatureKind {
    /// The 68-dimension feature space.
    Full,
    /// Sum, average rate of change and std of the popularity history.
    Latent,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub bucket: i64,
    /// Candidate topics, one per line (default: extracted hashtags).
    #[arg(long)]
    pub topics: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "full")]
    pub kind: FeatureKind,
    /// Latent history length in buckets (default: all buckets up to --bucket).
    #[arg(long)]
    pub history: Option<usize>,
    /// Named features to zero out, e.g. fc4.
    #[arg(long)]
    pub disable: Vec<String>,
    /// Apply trailing-window denoising to the candidates.
    #[arg(long)]
    pub denoise: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    #[command(flatten)]
    pub corpus: Option<CorpusArgs>,
    /// Current bucket; labels describe bucket + 1.
    #[arg(long, allow_hyphen_values = true)]
    pub bucket: Option<i64>,
    /// `quantile:<q>` or `threshold:<count>`.
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub topics: Option<PathBuf>,
    #[arg(long)]
    pub denoise: bool,
    /// Use the planted labels of a synthetic ledger instead.
    #[arg(long, conflicts_with = "messages")]
    pub ledger: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Score with this model instead of cross validating.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Compute RMSE on scores rather than hard labels.
    #[arg(long)]
    pub rmse_on_scores: bool,
    /// Method name for the scorecard row.
    #[arg(long, default_value = "classifier")]
    pub method: String,
    #[arg(long, default_value = "Medium")]
    pub complexity: String,
    #[arg(long, default_value = "High")]
    pub universality: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Builtin scenario (I, II, III, IV) or a scenario TOML file; repeatable.
    #[arg(long, required = true)]
    pub scenario: Vec<String>,
    #[arg(long)]
    pub scorecards: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// `dimension` or `feature`.
    #[arg(long, default_value = "dimension")]
    pub mode: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub topics: Option<usize>,
    /// Infectivity of popular topics.
    #[arg(long)]
    pub high: Option<f64>,
    /// Infectivity of the other topics.
    #[arg(long)]
    pub low: Option<f64>,
    #[arg(long)]
    pub buckets: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}
