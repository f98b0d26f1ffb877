//! `webcred` command-line front end.
//!
//! Exit codes: 0 success, 1 partial or data failure, 2 usage or config
//! error.

mod commands;
mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Config;

/// An error with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

/// What a command printed and how it ended.
pub struct Outcome {
    pub stdout: String,
    pub code: u8,
}

impl Outcome {
    pub fn ok(stdout: String) -> Self {
        Outcome { stdout, code: 0 }
    }
}

#[derive(Parser)]
#[command(name = "webcred", version, about = "Automated credibility scoring for web pages")]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Snapshot cache directory.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Only log errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
pub struct TableArgs {
    /// Directory holding the lexicon, list and rank tables.
    #[arg(long)]
    pub tables: Option<PathBuf>,
    /// Run without a table: gi, valence, opensources, pagerank or archive.
    #[arg(long = "disable", value_name = "TABLE")]
    pub disable: Vec<String>,
    /// Reference time for archive ages.
    #[arg(long)]
    pub as_of: Option<String>,
}

#[derive(Args, Clone, Default)]
pub struct ModelArgs {
    /// two_class, three_class or five_class.
    #[arg(long)]
    pub scheme: Option<String>,
    /// nb, adaboost, gb, ridge or svr.
    #[arg(long)]
    pub learner: Option<String>,
    /// Keep this percentile of features by univariate score.
    #[arg(long, conflicts_with = "top_k")]
    pub percentile: Option<f64>,
    /// Keep this many features instead of a percentile.
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Rated corpus format: microsoft or c3.
    #[arg(long)]
    pub format: Option<String>,
    /// Stack tag-window probabilities computed at this pad length.
    #[arg(long)]
    pub stack_pad: Option<usize>,
    /// Append the machine-readable run record to this file.
    #[arg(long)]
    pub record: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch the URLs of a corpus file into the cache.
    Ingest {
        /// Any delimited file with a `url` column.
        corpus: PathBuf,
    },
    /// Extract features for every cached page.
    Extract {
        #[command(flatten)]
        tables: TableArgs,
        /// Output features file (JSON lines).
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Train a model on labelled features and write its artifact.
    Train {
        features: PathBuf,
        labels: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        /// Output model artifact.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Cross-validate a learner on labelled features.
    Eval {
        features: PathBuf,
        labels: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Cross-validate the tag-window classifier across pad lengths.
    Sweep {
        labels: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated pad lengths.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        grid: Option<Vec<usize>>,
        /// Write `pad weighted_f1` plot data here.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Score one URL with a trained model.
    Score {
        artifact: PathBuf,
        url: String,
        #[command(flatten)]
        tables: TableArgs,
        /// Fail instead of fetching uncached URLs.
        #[arg(long)]
        no_fetch: bool,
        /// Number of top features to show.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Fact-checking impact table for claim evidence.
    Factcheck {
        evidence: PathBuf,
        artifact: PathBuf,
        #[command(flatten)]
        tables: TableArgs,
    },
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = cli.cache_dir {
        cfg.cache_dir = d;
    }
    match cli.command {
        Command::Ingest { corpus } => commands::ingest(&cfg, &corpus),
        Command::Extract { tables, out } => commands::extract(&cfg, &tables, &out),
        Command::Train {
            features,
            labels,
            model,
            out,
        } => commands::train(&cfg, &features, &labels, &model, &out),
        Command::Eval {
            features,
            labels,
            model,
        } => commands::eval(&cfg, &features, &labels, &model),
        Command::Sweep {
            labels,
            model,
            grid,
            plot,
        } => commands::sweep(&cfg, &labels, &model, grid, plot.as_deref()),
        Command::Score {
            artifact,
            url,
            tables,
            no_fetch,
            top,
        } => commands::score(&cfg, &artifact, &url, &tables, no_fetch, top),
        Command::Factcheck {
            evidence,
            artifact,
            tables,
        } => commands::factcheck(&cfg, &evidence, &artifact, &tables),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(o) => {
            print!("{}", o.stdout);
            ExitCode::from(o.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
