//! Command-line pipeline for supervised embedding-feature pruning.
//!
//! Configuration comes from a TOML file plus overriding flags; every
//! command writes byte-stable artifacts under the output directory. Exit
//! codes: 0 success, 1 internal error, 2 user/input error.

mod artifacts;
mod commands;
mod config;
mod errors;
mod solution;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use errors::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "semprune",
    version,
    about = "Prune word-embedding features against human similarity judgments, \
             then interpret and probe the result"
)]
pub struct Cli {
    /// TOML run configuration; file paths inside it resolve against its
    /// directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Embedding file (word followed by feature values per line).
    #[arg(long, global = true)]
    embedding: Option<PathBuf>,

    /// Plain-text corpus for co-occurrence counting.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,

    /// Semantic-norm ratings table (word plus one column per dimension).
    #[arg(long, global = true)]
    norms_ratings: Option<PathBuf>,

    /// Two-column dimension-to-area mapping for the norms.
    #[arg(long, global = true)]
    norms_areas: Option<PathBuf>,

    /// Where artifacts are written (default: semprune-out).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Worker threads; 0 uses one per core. Results never depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Co-occurrence window size in tokens (default 2).
    #[arg(long, global = true)]
    window: Option<usize>,

    /// Keep context words ranked at most this frequent (default 15000).
    #[arg(long, global = true)]
    frequency_cutoff: Option<u32>,

    /// Minimum fraction of nonzero PMI entries, exclusive (default 0.6).
    #[arg(long, global = true)]
    nonzero_threshold: Option<f64>,

    /// Correlation p-value threshold, exclusive (default 0.05).
    #[arg(long, global = true)]
    significance: Option<f64>,

    /// Number of top-ranked features to probe (default 60).
    #[arg(long, global = true)]
    probe_k: Option<usize>,

    /// PLSR component count (default 30).
    #[arg(long, global = true)]
    components: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Prune features per category and cross-validate the selection.
    Prune {
        /// Restrict to one configured category.
        #[arg(long)]
        category: Option<String>,
    },
    /// Dice overlap and retention counts across category solutions.
    Overlap {
        /// Solution JSON files (default: this run's prune outputs).
        files: Vec<PathBuf>,
    },
    /// Correlate context-word PMI profiles with PC1 of a pruned category.
    Interpret {
        /// Category to interpret.
        #[arg(long)]
        category: String,
        /// Solution file (default: this run's prune output).
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Probe solutions against rated semantic dimensions.
    Probe {
        /// Solution JSON files (default: this run's prune outputs).
        files: Vec<PathBuf>,
    },
    /// Build or refresh the corpus co-occurrence cache.
    CountCorpus,
}

fn run(cli: &Cli) -> CliResult<()> {
    let config = config::load(cli)?;
    if config.workers > 0 {
        // Ignore failure: the global pool can only be sized once, which is
        // fine for a single-command process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(config.workers).build_global();
    }
    match &cli.command {
        Command::Prune { category } => commands::prune::run(&config, category.as_deref()),
        Command::Overlap { files } => commands::overlap::run(&config, files),
        Command::Interpret { category, solution } => {
            commands::interpret::run(&config, category, solution.as_deref())
        }
        Command::Probe { files } => commands::probe::run(&config, files),
        Command::CountCorpus => commands::count_corpus::run(&config),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
