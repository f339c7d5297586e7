//! `newsphrase` — train, run, and evaluate the keyphrase extractor, and
//! build tag clouds from recent news.
//!
//! Every command is deterministic given its inputs, flags, seed, and
//! `--now`. Errors exit with status 2 and a message on stderr.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "newsphrase", version, about = "Keyphrase extraction for broadcast news")]
struct Cli {
    /// key=value configuration file; flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// machine-readable JSON output
    #[arg(long, global = true)]
    json: bool,

    /// worker threads (default: all cores)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ResourceArgs {
    /// language profile: pt or en
    #[arg(long)]
    language: Option<String>,

    /// stopword list file, one word per line
    #[arg(long, value_name = "FILE")]
    stopwords: Option<PathBuf>,

    /// named-entity lexicon file (tab-separated)
    #[arg(long, value_name = "FILE")]
    ne_lexicon: Option<PathBuf>,

    /// part-of-speech lexicon file (tab-separated)
    #[arg(long, value_name = "FILE")]
    pos_lexicon: Option<PathBuf>,

    /// language model for the phrase-probability feature: a compressed
    /// store or ARPA text
    #[arg(long, value_name = "FILE")]
    lm: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// labeled training corpus (JSON)
    #[arg(long, value_name = "FILE")]
    corpus: PathBuf,

    /// where to write the trained model
    #[arg(long, value_name = "FILE")]
    model_out: PathBuf,

    /// tree trainer: c45 or cart
    #[arg(long)]
    algorithm: Option<String>,

    /// bagging rounds
    #[arg(long)]
    bags: Option<usize>,

    /// training seed
    #[arg(long)]
    seed: Option<u64>,

    /// smallest leaf size a split may produce
    #[arg(long)]
    min_leaf: Option<usize>,

    /// pessimistic pruning (defaults to on for c45, off for cart)
    #[arg(long)]
    prune: Option<bool>,

    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Args)]
struct ExtractArgs {
    /// corpus file or single-document JSON object
    #[arg(long, value_name = "FILE")]
    input: PathBuf,

    /// trained model file
    #[arg(long, value_name = "FILE")]
    model: PathBuf,

    /// keyphrases per document
    #[arg(short, long)]
    n: Option<usize>,

    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    /// labeled test corpus (JSON)
    #[arg(long, value_name = "FILE")]
    corpus: PathBuf,

    /// trained model file
    #[arg(long, value_name = "FILE")]
    model: PathBuf,

    /// keyphrases per document
    #[arg(short, long)]
    n: Option<usize>,

    /// evaluate at n in {10, 20, 30, 35, 40} in one run
    #[arg(long)]
    sweep: bool,

    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Args)]
struct CompressLmArgs {
    /// ARPA text model to compress
    #[arg(long, value_name = "FILE")]
    arpa: PathBuf,

    /// where to write the compressed store
    #[arg(long, value_name = "FILE")]
    out: PathBuf,

    /// fingerprint bits per key
    #[arg(long, value_parser = clap::value_parser!(u32).range(8..=16))]
    fingerprint_bits: Option<u32>,

    /// quantizer bits per stored value
    #[arg(long, value_parser = clap::value_parser!(u32).range(4..=8))]
    quant_bits: Option<u32>,

    /// log10 penalty per dropped history word
    #[arg(long, allow_hyphen_values = true)]
    penalty: Option<f64>,

    /// hash seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CloudArgs {
    /// corpus of documents to consider (JSON)
    #[arg(long, value_name = "FILE")]
    corpus: PathBuf,

    /// trained model file
    #[arg(long, value_name = "FILE")]
    model: PathBuf,

    /// where to write the HTML cloud
    #[arg(long, value_name = "FILE")]
    out: PathBuf,

    /// cloud timestamp, RFC 3339 (default: wall clock)
    #[arg(long, value_name = "TIME")]
    now: Option<String>,

    /// restrict the cloud to one topic
    #[arg(long)]
    topic: Option<String>,

    /// hours of news the window covers
    #[arg(long)]
    window_hours: Option<i64>,

    /// news items feeding the cloud
    #[arg(long)]
    n_news: Option<usize>,

    /// keyphrases taken per news item
    #[arg(long)]
    phrases_per_doc: Option<usize>,

    /// entries kept in the cloud
    #[arg(long)]
    max_phrases: Option<usize>,

    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Train an extraction model on a labeled corpus
    Train(TrainArgs),
    /// Extract ranked keyphrases from documents
    Extract(ExtractArgs),
    /// Score a model against a labeled test corpus
    Evaluate(EvaluateArgs),
    /// Compress an ARPA model into the compact store
    CompressLm(CompressLmArgs),
    /// Build a tag cloud of the latest news
    Cloud(CloudArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(threads) = cli.threads {
        // a second initialization (tests, library callers) is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }

    let config = cli.config.as_deref();
    let result = match &cli.command {
        Command::Train(args) => commands::cmd_train(args, config, cli.json),
        Command::Extract(args) => commands::cmd_extract(args, config, cli.json),
        Command::Evaluate(args) => commands::cmd_evaluate(args, config, cli.json),
        Command::CompressLm(args) => commands::cmd_compress_lm(args, config, cli.json),
        Command::Cloud(args) => commands::cmd_cloud(args, config, cli.json),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
