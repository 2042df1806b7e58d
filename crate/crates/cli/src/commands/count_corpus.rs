//! `count-corpus`: build or refresh the windowed co-occurrence cache and
//! record corpus-level statistics.

use semprune::cooccur::{count_corpus_cached, CacheOutcome};
use semprune::hash::sha256_hex_file;
use serde::Serialize;
use serde_json::json;

use crate::artifacts::{ensure_dir, meta_input, write_json, write_meta};
use crate::config::{require, Config};
use crate::errors::CliResult;

#[derive(Serialize)]
struct CorpusSummary {
    window: usize,
    vocab_size: usize,
    total_tokens: u64,
    total_pairs: u64,
    corpus_sha256: String,
}

pub fn run(config: &Config) -> CliResult<()> {
    let corpus_path = require(&config.corpus, "corpus")?;
    let cache = config.cache_path(corpus_path);
    if let Some(parent) = cache.parent() {
        ensure_dir(parent)?;
    }
    let (stats, outcome) = count_corpus_cached(corpus_path, config.window, &cache)?;

    let dir = config.output_dir.join("count-corpus");
    ensure_dir(&dir)?;
    let summary = CorpusSummary {
        window: stats.window(),
        vocab_size: stats.vocab_size(),
        total_tokens: stats.total_tokens(),
        total_pairs: stats.total_pairs(),
        corpus_sha256: sha256_hex_file(corpus_path)?,
    };
    write_json(&dir.join("stats.json"), &summary)?;
    write_meta(
        &dir.join("meta.json"),
        "count-corpus",
        json!({ "window": config.window }),
        &[meta_input("corpus", corpus_path)?],
    )?;

    let state = match outcome {
        CacheOutcome::Hit => "cache hit".to_string(),
        CacheOutcome::Rebuilt(reason) => format!("cache rebuilt: {reason}"),
    };
    println!(
        "counted {} tokens ({} types, {} windowed pairs); {state}",
        summary.total_tokens, summary.vocab_size, summary.total_pairs
    );
    Ok(())
}
