use std::path::PathBuf;
use std::time::Duration;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use corpuskit_core::pii::EntityType;
use corpuskit_crawler::{Feed, Pagination};
use corpuskit_pipeline::CONFIG_ENV;

#[derive(Debug, Parser)]
#[command(name = "corpuskit", version, about = "Crawl, clean, anonymize, tag and analyse forum corpora")]
pub struct Cli {
    /// Pipeline config file (TOML). Command-line flags override its keys.
    #[arg(long, global = true, env = CONFIG_ENV, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// More log output; repeat for trace level.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Only warnings and errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Crawl the feeds and post pages into a corpus file.
    Crawl(CrawlArgs),
    /// Decode, collapse whitespace and screen fields for spam, blocked terms and length.
    Clean(CleanArgs),
    /// Mask personal data and secrets with typed placeholders.
    Anonymize(AnonymizeArgs),
    /// Tag every record with its language.
    Langid(LangidArgs),
    /// Compute corpus statistics and plot tables.
    Analyze(AnalyzeArgs),
    /// Run the configured stages end to end.
    Run(RunArgs),
    /// Print (and rewrite) the report of a finished run.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Processing {
    /// Worker threads for record processing.
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// Records per work unit.
    #[arg(long)]
    pub chunk_size: Option<usize>,
}

pub fn parse_duration(raw: &str) -> Result<Duration, String> {
    corpuskit_crawler::config::duration_text::parse(raw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PaginationArg {
    Cursor,
    Offset,
}

impl From<PaginationArg> for Pagination {
    fn from(p: PaginationArg) -> Self {
        match p {
            PaginationArg::Cursor => Pagination::Cursor,
            PaginationArg::Offset => Pagination::Offset,
        }
    }
}

/// Crawler settings shared by `crawl` and `run`.
#[derive(Debug, Clone, Default, Args)]
pub struct CrawlFlags {
    #[arg(long, value_name = "URL")]
    pub base_url: Option<String>,
    /// Requests per batch.
    #[arg(long)]
    pub batch: Option<usize>,
    /// Minimum gap between batch starts, e.g. `1s` or `250ms`.
    #[arg(long, value_parser = parse_duration)]
    pub delay: Option<Duration>,
    /// Feeds to enumerate, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub feeds: Vec<Feed>,
    #[arg(long, value_enum)]
    pub pagination: Option<PaginationArg>,
    #[arg(long)]
    pub max_retries: Option<u32>,
    #[arg(long, value_parser = parse_duration)]
    pub retry_base: Option<Duration>,
    #[arg(long, value_parser = parse_duration)]
    pub timeout: Option<Duration>,
    #[arg(long, value_name = "TOKEN")]
    pub bearer_token: Option<String>,
    /// Drop posts created before this RFC 3339 time.
    #[arg(long)]
    pub window_start: Option<DateTime<Utc>>,
    /// Drop posts created after this RFC 3339 time.
    #[arg(long)]
    pub window_end: Option<DateTime<Utc>>,
}

#[derive(Debug, Args)]
pub struct CrawlArgs {
    #[command(flatten)]
    pub crawl: CrawlFlags,
    /// Corpus file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Crawl event log; defaults to `crawl_log.jsonl` next to the corpus.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Seeds retry jitter.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// One phrase per line, `#` starts a comment.
    #[arg(long)]
    pub blocklist: Option<PathBuf>,
    /// Fields with more whitespace-separated tokens are removed.
    #[arg(long)]
    pub limit_tokens: Option<usize>,
    /// Write the field outcome counts here as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub processing: Processing,
}

#[derive(Debug, Args)]
pub struct AnonymizeArgs {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the masking counts here as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// BIP39 word list replacing the embedded one.
    #[arg(long)]
    pub wordlist: Option<PathBuf>,
    /// Entity types to leave unmasked, e.g. `PHONE_NUMBER`.
    #[arg(long, value_delimiter = ',')]
    pub disable: Vec<EntityType>,
    #[command(flatten)]
    pub processing: Processing,
}

#[derive(Debug, Args)]
pub struct LangidArgs {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Character n-gram profile file instead of the embedded model.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Write the tagging counts here as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub processing: Processing,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Stats document to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Directory for the plot CSVs.
    #[arg(long)]
    pub plots: Option<PathBuf>,
    /// The platform's own host, left out of external-domain counts.
    #[arg(long)]
    pub self_domain: Option<String>,
    /// Posts per hour above which an author counts as high-rate.
    #[arg(long)]
    pub rate_threshold: Option<f64>,
    /// Lower cutoff for power-law fits.
    #[arg(long)]
    pub xmin: Option<u64>,
    #[command(flatten)]
    pub processing: Processing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StageArg {
    Crawl,
    Clean,
    Anonymize,
    Langid,
    Analyze,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Raw corpus; not needed when crawling.
    #[arg(long = "in", value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stream every record stage in one pass without intermediate files.
    #[arg(long)]
    pub fused: bool,
    /// Stages to switch on, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub enable: Vec<StageArg>,
    /// Stages to switch off, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub skip: Vec<StageArg>,
    #[arg(long)]
    pub blocklist: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub crawl: CrawlFlags,
    #[command(flatten)]
    pub processing: Processing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory of a finished run; defaults to the configured output_dir.
    pub run_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}
