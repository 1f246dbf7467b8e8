//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "daf",
    version,
    about = "Dynamic attention fusion for multimodal sentiment regression"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Train a model and write checkpoint, history CSV, and run record.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset split.
    Evaluate(EvaluateArgs),
    /// Run a modality × fusion ablation matrix.
    Ablate(AblateArgs),
    /// Emit the ROC curve (CSV + SVG) for a checkpoint.
    Roc(RocArgs),
    /// Check tape gradients against central finite differences.
    Gradcheck(GradcheckArgs),
    /// Generate a synthetic dataset with a known informative-modality
    /// oracle.
    GenSynth(GenSynthArgs),
}

/// Flags shared by the run-oriented subcommands. Values given here
/// override the config file.
#[derive(Args, Clone, Debug)]
pub struct CommonOpts {
    /// Flat key=value config file with dotted sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset directory (manifest.json plus split files).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated seed list.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Single seed (shorthand for --seeds with one entry).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated modality set; text is required.
    #[arg(long)]
    pub modalities: Option<String>,
    /// Fusion variant: softmax3 | sigmoid2 | static.
    #[arg(long)]
    pub fusion: Option<String>,
    /// What a missing modality does: reduce_gate | zero_input.
    #[arg(long)]
    pub missing_policy: Option<String>,
    /// Per-frame L2 normalization of audio/video features: on | off.
    #[arg(long)]
    pub l2_norm: Option<String>,
    /// Learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Maximum training epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonOpts,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Checkpoint file written by `daf train`.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Dataset directory.
    #[arg(long)]
    pub data: PathBuf,
    /// Split to evaluate: train | val | test.
    #[arg(long, default_value = "test")]
    pub split: String,
    /// Optional directory for report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-frame L2 normalization: on | off (default on).
    #[arg(long)]
    pub l2_norm: Option<String>,
}

#[derive(Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Modality rows, `|`-separated (each a comma list). Defaults to
    /// the four comparison-table rows.
    #[arg(long)]
    pub cells: Option<String>,
    /// Fusion variants to cross with the rows (comma list).
    #[arg(long, value_delimiter = ',')]
    pub fusions: Vec<String>,
}

#[derive(Args)]
pub struct RocArgs {
    /// Checkpoint file written by `daf train`.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Dataset directory.
    #[arg(long)]
    pub data: PathBuf,
    /// Split to score: train | val | test.
    #[arg(long, default_value = "test")]
    pub split: String,
    /// Output directory for roc.csv and roc.svg.
    #[arg(long, default_value = "runs/roc")]
    pub out: PathBuf,
    /// Per-frame L2 normalization: on | off (default on).
    #[arg(long)]
    pub l2_norm: Option<String>,
}

#[derive(Args)]
pub struct GradcheckArgs {
    /// Fusion variants to check (comma list, or `all`).
    #[arg(long, default_value = "all")]
    pub fusion: String,
    /// Pass threshold on the relative error.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
    /// Seeds to check.
    #[arg(long, value_delimiter = ',', default_values_t = [0u64, 1, 2, 3, 4])]
    pub seeds: Vec<u64>,
    /// Audio/video sequence lengths to exercise.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 3, 7])]
    pub seq_lens: Vec<usize>,
    /// Batch size of the random probe batch.
    #[arg(long, default_value_t = 2)]
    pub batch: usize,
    /// Elements checked per parameter tensor (sampled
    /// deterministically). 0 checks every element.
    #[arg(long, default_value_t = 8)]
    pub elements_per_param: usize,
    /// Check every element of every parameter (slow at full widths).
    #[arg(long)]
    pub exhaustive: bool,
    /// Test hook: corrupt the named parameter's tape gradient to
    /// exercise failure reporting.
    #[arg(long)]
    pub inject_fault: Option<String>,
    /// Encoder kind: linear | bi_recurrent.
    #[arg(long, default_value = "bi_recurrent")]
    pub encoder: String,
}

#[derive(Args)]
pub struct GenSynthArgs {
    /// Output dataset directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Total sample count across splits.
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub noise_std: f64,
    /// Informative-modality probabilities for text,audio,video.
    #[arg(long, default_value = "0.34,0.33,0.33")]
    pub probs: String,
    /// Inclusive sequence-length range, `lo,hi`.
    #[arg(long, default_value = "4,12")]
    pub seq_len: String,
    /// Train and val fractions, `train,val`; the rest is test.
    #[arg(long, default_value = "0.7,0.15")]
    pub split: String,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Record encoding: jsonl | binary.
    #[arg(long, default_value = "jsonl")]
    pub encoding: String,
    /// Feature widths, `text,audio,video`.
    #[arg(long, default_value = "768,74,35")]
    pub dims: String,
}
