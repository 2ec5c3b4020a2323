use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "lexmask", version, about = "Lexicon-guided whole-word masking data pipeline")]
pub struct Cli {
    /// TOML file supplying defaults for any flag.
    #[arg(long, global = true, env = "LEXMASK_CONFIG")]
    pub config: Option<PathBuf>,

    /// Worker threads. Output never depends on this.
    #[arg(long, global = true, env = "LEXMASK_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Strip URLs, mentions, hashtags and emoticons; drop short posts.
    Clean(CleanArgs),
    /// Segment a corpus into words by forward maximum matching.
    Segment(SegmentArgs),
    /// Grow a seed lexicon by label propagation over a co-occurrence graph.
    ExpandLexicon(ExpandArgs),
    /// Tokenize a corpus and cut it into fixed-length chunks.
    Chunk(ChunkArgs),
    /// Produce masked training examples from chunks or a corpus.
    Mask(MaskArgs),
    /// Per-source user and post counts of a raw corpus.
    Stats(StatsArgs),
    /// Mask target words of probe sentences.
    Probe(ProbeArgs),
    /// Precision, recall and F1 of a predictions file.
    Eval(EvalArgs),
    /// Deterministic k-fold index split.
    Split(SplitArgs),
    /// Size and label statistics of a labeled dataset.
    Summary(SummaryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// Detect from the first non-blank line.
    Auto,
    Jsonl,
    /// One post per line.
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChunkFormat {
    Jsonl,
    Binary,
}

#[derive(Debug, Args)]
pub struct IoArgs {
    #[arg(long, env = "LEXMASK_INPUT")]
    pub input: Option<PathBuf>,
    #[arg(long, env = "LEXMASK_OUTPUT")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long, value_enum, env = "LEXMASK_INPUT_FORMAT")]
    pub input_format: Option<InputFormat>,
    /// Source name for plain-text input.
    #[arg(long, env = "LEXMASK_SOURCE")]
    pub source: Option<String>,
}

#[derive(Debug, Args)]
pub struct SegArgs {
    /// Word list(s), one word per line; repeat or comma-separate to union.
    #[arg(long, env = "LEXMASK_DICT", value_delimiter = ',')]
    pub dict: Vec<PathBuf>,
    /// Lexicon TSV (word, score, seed flag).
    #[arg(long, env = "LEXMASK_LEXICON")]
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, env = "LEXMASK_MIN_CHARS")]
    pub min_chars: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub seg: SegArgs,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub seg: SegArgs,
    /// Plain seed list, one word per line, merged into --lexicon.
    #[arg(long, env = "LEXMASK_SEEDS")]
    pub seeds: Option<PathBuf>,
    /// Co-occurrence window in words.
    #[arg(long, env = "LEXMASK_WINDOW")]
    pub window: Option<usize>,
    #[arg(long, env = "LEXMASK_MIN_WEIGHT")]
    pub min_weight: Option<f64>,
    #[arg(long, env = "LEXMASK_TOL")]
    pub tol: Option<f64>,
    #[arg(long, env = "LEXMASK_MAX_ITER")]
    pub max_iter: Option<usize>,
    /// Minimum propagated score for a word to join the lexicon.
    #[arg(long, env = "LEXMASK_CUTOFF")]
    pub cutoff: Option<f64>,
    /// Ignore seeds absent from the corpus instead of failing.
    #[arg(long, env = "LEXMASK_SKIP_MISSING_SEEDS")]
    pub skip_missing_seeds: bool,
}

#[derive(Debug, Args)]
pub struct ChunkArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub seg: SegArgs,
    #[arg(long, env = "LEXMASK_VOCAB")]
    pub vocab: Option<PathBuf>,
    #[arg(long, env = "LEXMASK_CHUNK_LEN")]
    pub chunk_len: Option<usize>,
    #[arg(long, value_enum, env = "LEXMASK_FORMAT")]
    pub format: Option<ChunkFormat>,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub seg: SegArgs,
    #[arg(long, env = "LEXMASK_VOCAB")]
    pub vocab: Option<PathBuf>,
    /// Chunk length when the input is a text corpus.
    #[arg(long, env = "LEXMASK_CHUNK_LEN")]
    pub chunk_len: Option<usize>,
    /// Minimum fraction of each chunk to mask.
    #[arg(long, env = "LEXMASK_BUDGET")]
    pub budget: Option<f64>,
    /// Replacement ratios as mask:random:keep.
    #[arg(long, env = "LEXMASK_POLICY")]
    pub policy: Option<String>,
    #[arg(long, env = "LEXMASK_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, env = "LEXMASK_MIN_CHARS")]
    pub min_chars: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, env = "LEXMASK_AVERAGING")]
    pub averaging: Option<String>,
    /// Positive class for binary averaging (default: the last class).
    #[arg(long, env = "LEXMASK_POSITIVE")]
    pub positive: Option<String>,
    /// Fixed class list; inferred from the data when absent.
    #[arg(long, env = "LEXMASK_LABELS", value_delimiter = ',')]
    pub labels: Vec<String>,
    /// Treat gold/pred as label sets (inferred when any sample has other than one label).
    #[arg(long, env = "LEXMASK_MULTI_LABEL")]
    pub multi_label: bool,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Count records in this file to get the number of samples.
    #[arg(long, env = "LEXMASK_INPUT", conflicts_with = "n")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, env = "LEXMASK_OUTPUT")]
    pub output: Option<PathBuf>,
    #[arg(long, env = "LEXMASK_FOLDS")]
    pub folds: Option<usize>,
    #[arg(long, env = "LEXMASK_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SummaryArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub val: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, env = "LEXMASK_DICT", value_delimiter = ',')]
    pub dict: Vec<PathBuf>,
    #[arg(long, env = "LEXMASK_OUTPUT")]
    pub output: Option<PathBuf>,
}
