use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pdcnet::model::Ablation;

#[derive(Debug, Parser)]
#[command(name = "pdcnet", version, about = "Peptide-drug conjugate activity prediction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize, deduplicate and label raw records.
    Curate(CurateArgs),
    /// Seeded 8:1:1 train/validation/test split.
    Split(SplitArgs),
    /// Train the network with early stopping.
    Train(TrainArgs),
    /// Ten-metric report of a checkpoint on one split part.
    Evaluate(EvaluateArgs),
    /// Score records with a checkpoint.
    Predict(PredictArgs),
    /// k-fold cross-validation.
    Crossval(CrossvalArgs),
    /// Random hyperparameter search.
    Hpo(HpoArgs),
    /// Train and evaluate the logistic-regression baseline.
    Baseline(BaselineArgs),
    /// Novelty of query records against a reference set.
    Similarity(SimilarityArgs),
    /// Channel Shapley values and residue attention per record.
    Explain(ExplainArgs),
    /// Write fused feature vectors as CSV.
    ExportFeatures(ExportArgs),
    /// Train the full model and the five channel-ablated variants.
    Ablation(AblationArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct CurateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Curation report; defaults to `<out>.report.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Activity threshold for measurement-based labels, in uM.
    #[arg(long, default_value_t = 1.0)]
    pub threshold_um: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SplitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Defaults to `<in>.split.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Apply the split proportions within each class.
    #[arg(long)]
    pub stratified: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmbeddingArgs {
    /// Peptide embedding table (JSONL), keyed by sequence.
    #[arg(long)]
    pub peptide_embeddings: Option<PathBuf>,
    /// Molecule embedding table (JSONL), keyed by SMILES.
    #[arg(long)]
    pub molecule_embeddings: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NetArgs {
    /// JSON file with optional `model` and `train` sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub d_h: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub pos_weight: Option<f64>,
    /// Width of an optional hidden layer in the head.
    #[arg(long)]
    pub hidden: Option<usize>,
    #[command(flatten)]
    pub embeddings: EmbeddingArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// Curated records.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    /// Checkpoint path.
    #[arg(long)]
    pub out: PathBuf,
    /// Epoch history CSV; defaults to `<out>.history.csv`.
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Train a channel-ablated variant, e.g. `without_payload` or `w/o payload`.
    #[arg(long, value_parser = parse_ablation)]
    pub ablation: Option<Ablation>,
    #[command(flatten)]
    pub net: NetArgs,
}

fn parse_ablation(s: &str) -> Result<Ablation, String> {
    s.parse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Train,
    Val,
    Test,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long, value_enum, default_value_t = Part::Test)]
    pub part: Part,
    /// Score at or above which a record is predicted active.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub embeddings: EmbeddingArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[command(flatten)]
    pub embeddings: EmbeddingArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CrossvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub net: NetArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct HpoArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    /// Search log plus the best `model`/`train` configuration.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub net: NetArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct BaselineArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    /// Model checkpoint path.
    #[arg(long)]
    pub out: PathBuf,
    /// Metrics JSON; defaults to `<out>.metrics.json`.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long, value_enum, default_value_t = Part::Test)]
    pub part: Part,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SimilarityArgs {
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Probability,
    Logit,
}

#[derive(Debug, Args, Serialize)]
pub struct ExplainArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Output the Shapley game is played on.
    #[arg(long, value_enum, default_value_t = Value::Probability)]
    pub value: Value,
    #[command(flatten)]
    pub embeddings: EmbeddingArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ExportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Trained checkpoint; without one a freshly initialized model is used.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Initialization seed when no checkpoint is given.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub net: NetArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct AblationArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub net: NetArgs,
}
