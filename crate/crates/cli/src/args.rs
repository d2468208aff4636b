use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use csdial::corpus::CorpusFormat;
use csdial::metric::HistoryScope;
use csdial::FeatureMask;

#[derive(Debug, Parser)]
#[command(
    name = "csdial",
    version,
    about = "Commonsense-grounded dialogue filtering and response scoring",
    long_about = None,
    propagate_version = true
)]
pub struct Cli {
    /// Seed for every randomized step (data splits, weight init, shuffling)
    #[arg(long, global = true, default_value_t = 0, help_heading = "Global options")]
    pub seed: u64,

    /// Worker threads for filtering and featurization [default: logical cores]
    #[arg(long, global = true, value_parser = positive, help_heading = "Global options")]
    pub jobs: Option<usize>,

    /// More log output on standard error (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count, help_heading = "Global options")]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a ConceptNet-style assertion file and report what was kept
    Ingest(IngestArgs),
    /// Print the concept set of each input text as JSON lines
    ExtractConcepts(ExtractArgs),
    /// Keep dialogues with at least one graph-linked adjacent turn pair
    Filter(FilterArgs),
    /// Split story contexts into usable dialogue prompts and rejects
    SelectPrompts(SelectPromptsArgs),
    /// Compute regressor features for annotated responses
    Featurize(FeaturizeArgs),
    /// Train a response-quality regressor on annotated responses
    Train(TrainArgs),
    /// Add predicted scores to history/response rows
    Score(ScoreArgs),
    /// Cross-validate the regressor and report Spearman correlations
    Evaluate(EvaluateArgs),
    /// Summarize a filter run from its stats or reports file
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Assertion file: ConceptNet CSV rows or head<TAB>relation<TAB>tail[<TAB>weight]
    #[arg(long, value_name = "PATH")]
    pub graph: PathBuf,

    /// Language code accepted from ConceptNet URIs
    #[arg(long, default_value = "en", value_name = "CODE")]
    pub language: String,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Assertion file: ConceptNet CSV rows or head<TAB>relation<TAB>tail[<TAB>weight]
    #[arg(value_name = "ASSERTIONS")]
    pub input: PathBuf,

    /// Also write the ingest summary JSON here
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,

    /// Write the kept triples as head<TAB>relation<TAB>tail<TAB>weight
    #[arg(long, value_name = "PATH")]
    pub graph_out: Option<PathBuf>,

    /// Language code accepted from ConceptNet URIs
    #[arg(long, default_value = "en", value_name = "CODE")]
    pub language: String,

    /// Stop reading after this many distinct triples
    #[arg(long, value_name = "N")]
    pub max_triples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Texts to analyse; without any, lines are read from --input or standard input
    #[arg(value_name = "TEXT")]
    pub texts: Vec<String>,

    /// Read one text per line from this file
    #[arg(long, value_name = "PATH", conflicts_with = "texts")]
    pub input: Option<PathBuf>,

    /// Write JSON lines here instead of standard output
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub graph: GraphArgs,

    /// Dialogue corpus to filter
    #[arg(long, value_name = "PATH")]
    pub corpus: PathBuf,

    /// Corpus layout [default: keyed-json for .json files, jsonl otherwise]
    #[arg(long, value_name = "FORMAT", value_parser = parse_format)]
    pub format: Option<CorpusFormat>,

    /// Kept dialogues, in the input layout
    #[arg(long, value_name = "PATH")]
    pub kept: PathBuf,

    /// Per-dialogue match reports as JSON lines
    #[arg(long, value_name = "PATH")]
    pub reports: PathBuf,

    /// Corpus statistics as one JSON object
    #[arg(long, value_name = "PATH")]
    pub stats: PathBuf,

    /// Dialogues annotated per parallel batch
    #[arg(long, default_value_t = 1024, value_name = "N", value_parser = positive)]
    pub chunk_size: usize,

    /// Report progress on standard error every N dialogues (0 disables)
    #[arg(long, default_value_t = 10_000, value_name = "N")]
    pub progress_every: u64,
}

#[derive(Debug, Args)]
pub struct SelectPromptsArgs {
    /// Contexts as id<TAB>text lines
    #[arg(long, value_name = "PATH")]
    pub contexts: PathBuf,

    /// Accepted contexts as id<TAB>text
    #[arg(long, value_name = "PATH")]
    pub kept: PathBuf,

    /// Rejected contexts as id<TAB>text<TAB>reason
    #[arg(long, value_name = "PATH")]
    pub rejected: PathBuf,

    /// First-name list, one per line, replacing the bundled one
    #[arg(long, value_name = "PATH")]
    pub names: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScorerArgs {
    /// Language-model scorer: echo, hash, an http:// URL, or stdio:<command>
    #[arg(long, env = "CSDIAL_SCORER", hide_env_values = true, value_name = "ENDPOINT")]
    pub scorer: Option<String>,

    /// Use no language model; neural features become constant
    #[arg(long)]
    pub null_scorer: bool,

    /// Seconds to wait for each scorer reply
    #[arg(long, default_value_t = 30.0, value_name = "SECONDS")]
    pub scorer_timeout: f64,

    /// Retries after a scorer timeout or transport failure
    #[arg(long, default_value_t = 2, value_name = "N")]
    pub scorer_retries: u32,
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    /// History turns whose concepts count: all, or only the last
    #[arg(long, default_value = "all", value_name = "SCOPE", value_parser = parse_scope)]
    pub history: HistoryScope,

    /// Literal placed between turns when scoring history plus response
    #[arg(long, default_value = "\\n", value_name = "TEXT")]
    pub separator: String,

    /// Upper bound on the two-hop path count
    #[arg(long, default_value_t = csdial::matching::DEFAULT_TWO_HOP_CAP, value_name = "N")]
    pub two_hop_cap: u64,

    /// History/response pairs per scorer request
    #[arg(long, default_value_t = 32, value_name = "N", value_parser = positive)]
    pub lm_batch: usize,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Annotated responses as JSON lines
    #[arg(long, value_name = "PATH")]
    pub annotations: PathBuf,

    /// Average rows that share dialogue, history and response into one
    #[arg(long)]
    pub average: bool,
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    /// Hidden layer widths
    #[arg(long, value_delimiter = ',', default_value = "32,32", value_name = "N,N")]
    pub hidden: Vec<usize>,

    /// Adam learning rate
    #[arg(long, default_value_t = 1e-3, value_name = "RATE")]
    pub learning_rate: f64,

    /// Examples per minibatch
    #[arg(long, default_value_t = 32, value_name = "N")]
    pub batch_size: usize,

    /// Maximum training epochs
    #[arg(long, default_value_t = 500, value_name = "N")]
    pub epochs: usize,

    /// Epochs without improvement before stopping early
    #[arg(long, default_value_t = 25, value_name = "N")]
    pub patience: usize,

    /// Share of training data held out for early stopping
    #[arg(long, default_value_t = 0.1, value_name = "FRACTION")]
    pub dev_fraction: f64,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    #[command(flatten)]
    pub features: FeatureArgs,

    /// Feature rows as JSON lines
    #[arg(long, value_name = "PATH")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,

    /// Features the regressor sees: symbolic, neural or all
    #[arg(long, default_value = "all", value_name = "MASK", value_parser = parse_mask)]
    pub mask: FeatureMask,

    /// Where to write the model file
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Trained model file
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,

    /// JSON lines with "history" and "response"; other fields are kept
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,

    /// Input rows with "predicted_score" added
    #[arg(long, value_name = "PATH")]
    pub output: PathBuf,

    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,

    /// Feature masks to evaluate, in output order
    #[arg(long, value_delimiter = ',', default_value = "all,symbolic,neural", value_name = "MASK", value_parser = parse_mask)]
    pub mask: Vec<FeatureMask>,

    /// Cross-validation folds
    #[arg(long, default_value_t = csdial::metric::DEFAULT_FOLDS, value_name = "N")]
    pub folds: usize,

    /// Where to write the per-fold and pooled correlation report
    #[arg(long, value_name = "PATH")]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Stats JSON or reports JSON lines written by `filter`
    #[arg(value_name = "PATH")]
    pub input: PathBuf,

    /// Print the stats as JSON instead of a table
    #[arg(long)]
    pub json: bool,
}

fn parse_format(s: &str) -> Result<CorpusFormat, String> {
    s.parse()
}

fn parse_scope(s: &str) -> Result<HistoryScope, String> {
    s.parse()
}

fn parse_mask(s: &str) -> Result<FeatureMask, String> {
    s.parse()
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}
