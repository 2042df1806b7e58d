//! `interpret`: correlate context-word PMI profiles with the first
//! principal component of a category's embedding rows, for both the pruned
//! and the full feature set, and compare the two hit lists.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use semprune::cooccur::count_corpus_cached;
use semprune::interpret::{
    compare_pruned_full, interpret_category, pca_first_pc, FilterCounts, HitComparison,
};
use semprune::pruner::FeatureSet;
use semprune::{EmbeddingMatrix64, Interpretation64, InterpretationHit64, Pc1Result64};
use serde::Serialize;
use serde_json::json;

use crate::artifacts::{ensure_dir, fmt_float, meta_input, write_csv, write_meta};
use crate::config::{require, Config};
use crate::errors::{CliError, CliResult};
use crate::solution::load_solution;

#[derive(Serialize)]
struct InterpretReport {
    category: String,
    window: usize,
    frequency_cutoff: u32,
    nonzero_threshold: f64,
    significance: f64,
    pc1_pruned: Pc1Result64,
    pc1_full: Pc1Result64,
    filter_counts_pruned: FilterCounts,
    filter_counts_full: FilterCounts,
    hits_pruned: Vec<InterpretationHit64>,
    hits_full: Vec<InterpretationHit64>,
    comparison: HitComparison,
}

fn hit_rows(hits: &[InterpretationHit64]) -> Vec<Vec<String>> {
    hits.iter()
        .map(|h| {
            vec![
                h.word.clone(),
                fmt_float(h.rho),
                fmt_float(h.p),
                fmt_float(h.nonzero_fraction),
                h.frequency_rank.to_string(),
            ]
        })
        .collect()
}

const HIT_HEADER: [&str; 5] = ["word", "rho", "p", "nonzero_fraction", "frequency_rank"];

pub fn run(config: &Config, category: &str, solution_flag: Option<&Path>) -> CliResult<()> {
    let embedding_path = require(&config.embedding, "embedding")?;
    let corpus_path = require(&config.corpus, "corpus")?;
    let solution_path: PathBuf = match solution_flag {
        Some(p) => p.to_path_buf(),
        None => config.solution_path(category),
    };
    let sol = load_solution(&solution_path)?;
    if sol.category != category {
        return Err(CliError::User(format!(
            "solution file {} is for category {:?}, not {category:?}",
            solution_path.display(),
            sol.category
        )));
    }

    let keep: BTreeSet<String> = sol.words.iter().cloned().collect();
    let embedding = EmbeddingMatrix64::read_text_filtered(embedding_path, &keep)?
        .select_words(&sol.words)?;
    if embedding.n_features() != sol.n_features {
        return Err(CliError::User(format!(
            "solution was fit on {} features but the embedding has {}",
            sol.n_features,
            embedding.n_features()
        )));
    }

    let cache = config.cache_path(corpus_path);
    if let Some(parent) = cache.parent() {
        ensure_dir(parent)?;
    }
    let (stats, _outcome) = count_corpus_cached(corpus_path, config.window, &cache)?;

    let filters = semprune::InterpretFilters64 {
        frequency_cutoff: config.frequency_cutoff,
        nonzero_threshold: config.nonzero_threshold,
        significance: config.significance,
    };
    let pc1_pruned = pca_first_pc(&embedding, &sol.solution.selected)?;
    let pc1_full = pca_first_pc(&embedding, &FeatureSet::full(embedding.n_features()))?;
    let pruned: Interpretation64 = interpret_category(&stats, &pc1_pruned, &sol.words, &filters)?;
    let full: Interpretation64 = interpret_category(&stats, &pc1_full, &sol.words, &filters)?;
    let comparison = compare_pruned_full(&pruned.hits, &full.hits);

    let dir = config.output_dir.join("interpret");
    ensure_dir(&dir)?;
    write_csv(
        &dir.join(format!("{category}.pruned.hits.csv")),
        &HIT_HEADER,
        &hit_rows(&pruned.hits),
    )?;
    write_csv(&dir.join(format!("{category}.full.hits.csv")), &HIT_HEADER, &hit_rows(&full.hits))?;

    println!(
        "{category}: {} pruned hits, {} full hits, {} common",
        comparison.n_pruned, comparison.n_full, comparison.n_common
    );

    let report = InterpretReport {
        category: category.to_string(),
        window: config.window,
        frequency_cutoff: config.frequency_cutoff,
        nonzero_threshold: config.nonzero_threshold,
        significance: config.significance,
        pc1_pruned,
        pc1_full,
        filter_counts_pruned: pruned.counts,
        filter_counts_full: full.counts,
        hits_pruned: pruned.hits,
        hits_full: full.hits,
        comparison,
    };
    crate::artifacts::write_json(&dir.join(format!("{category}.report.json")), &report)?;

    let inputs = vec![
        meta_input("embedding", embedding_path)?,
        meta_input("corpus", corpus_path)?,
        meta_input("solution", &solution_path)?,
    ];
    write_meta(
        &dir.join(format!("{category}.meta.json")),
        "interpret",
        json!({
            "window": config.window,
            "frequency_cutoff": config.frequency_cutoff,
            "nonzero_threshold": config.nonzero_threshold,
            "significance": config.significance,
        }),
        &inputs,
    )?;
    Ok(())
}
