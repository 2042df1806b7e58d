//! `prune`: per-category feature pruning plus leave-one-word-out
//! cross-validation, written as a solution JSON, a fold CSV, and a
//! one-row-per-category summary CSV.

use std::collections::BTreeSet;
use std::path::Path;

use semprune::pruner::{cross_validate, prune};
use semprune::rsm::read_ratings;
use semprune::stats::mean_sd;
use semprune::{CrossValidation64, EmbeddingMatrix64, HumanRatings64};
use serde_json::json;

use crate::artifacts::{
    ensure_dir, fmt_float, fmt_opt_float, fmt_opt_usize, meta_input, write_csv, write_json,
    write_meta,
};
use crate::config::{require, Category, Config};
use crate::errors::{CliError, CliResult};
use crate::solution::{CvSummary, SolutionFile};

struct CategoryData {
    words: Vec<String>,
    embedding: EmbeddingMatrix64,
    ratings: HumanRatings64,
}

/// Loads ratings, applies the optional configured word list, and extracts
/// the matching embedding rows in ratings-vocabulary order.
fn load_category(embedding_path: &Path, cat: &Category) -> CliResult<CategoryData> {
    let ratings: HumanRatings64 = read_ratings(&cat.ratings)?;
    let ratings = match &cat.words {
        Some(words) => {
            let wanted: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
            let keep: BTreeSet<String> = wanted.iter().cloned().collect();
            let (restricted, _) = ratings.restrict_to(&keep)?;
            for word in &wanted {
                if restricted.index_of(word).is_none() {
                    return Err(CliError::User(format!(
                        "category {:?}: word {word:?} has no ratings in {}",
                        cat.name,
                        cat.ratings.display()
                    )));
                }
            }
            restricted
        }
        None => ratings,
    };
    if ratings.words.len() < 4 {
        return Err(CliError::User(format!(
            "category {:?} has {} rated words; at least 4 are needed",
            cat.name,
            ratings.words.len()
        )));
    }
    let keep: BTreeSet<String> = ratings.words.iter().cloned().collect();
    let embedding = EmbeddingMatrix64::read_text_filtered(embedding_path, &keep)?
        .select_words(&ratings.words)?;
    Ok(CategoryData { words: ratings.words.clone(), embedding, ratings })
}

fn summarize(cv: &CrossValidation64) -> CvSummary {
    let stats = |xs: &[f64]| -> (Option<f64>, Option<f64>) {
        match mean_sd(xs) {
            Ok((mean, sd)) => (Some(mean), sd),
            Err(_) => (None, None),
        }
    };
    let good: Vec<_> = cv.folds.iter().filter(|f| !f.is_degenerate()).collect();
    let baseline: Vec<f64> = good.iter().filter_map(|f| f.baseline_test_rho).collect();
    let pruned: Vec<f64> = good.iter().filter_map(|f| f.pruned_test_rho).collect();
    let retained: Vec<f64> =
        good.iter().filter_map(|f| f.n_retained).map(|n| n as f64).collect();
    let (baseline_test_mean, baseline_test_sd) = stats(&baseline);
    let (pruned_test_mean, pruned_test_sd) = stats(&pruned);
    let (retained_mean, retained_sd) = stats(&retained);
    CvSummary {
        n_folds: cv.folds.len(),
        n_degenerate_folds: cv.folds.len() - good.len(),
        baseline_test_mean,
        baseline_test_sd,
        pruned_test_mean,
        pruned_test_sd,
        retained_mean,
        retained_sd,
        t: cv.t_statistic.map(|(t, _)| t),
        dof: cv.t_statistic.map(|(_, dof)| dof),
    }
}

pub fn run(config: &Config, only: Option<&str>) -> CliResult<()> {
    let embedding_path = require(&config.embedding, "embedding")?;
    let selected: Vec<&Category> = match only {
        Some(name) => vec![config.category(name)?],
        None => config.categories.iter().collect(),
    };
    if selected.is_empty() {
        return Err(CliError::User(
            "no categories configured; add [[category]] entries to the config".into(),
        ));
    }
    let dir = config.output_dir.join("prune");
    ensure_dir(&dir)?;

    let mut inputs = vec![meta_input("embedding", embedding_path)?];
    let mut summary_rows = Vec::new();
    for cat in &selected {
        let data = load_category(embedding_path, cat)?;
        let pairs = data.ratings.similarities.pairs().clone();
        let solution = prune(&data.embedding, &data.ratings.similarities, &pairs)?;
        let cv = cross_validate(&data.embedding, &data.ratings.similarities)?;
        let summary = summarize(&cv);

        println!(
            "{}: kept {} of {} features, train rho {} -> {}",
            cat.name,
            solution.selected.len(),
            data.embedding.n_features(),
            fmt_float(solution.baseline_rho),
            fmt_float(solution.selected_rho),
        );

        let file = SolutionFile {
            category: cat.name.clone(),
            words: data.words.clone(),
            n_features: data.embedding.n_features(),
            n_pairs_rated: pairs.len(),
            solution,
            cross_validation: cv,
            summary,
        };
        write_json(&dir.join(format!("{}.solution.json", cat.name)), &file)?;

        let fold_rows: Vec<Vec<String>> = file
            .cross_validation
            .folds
            .iter()
            .map(|f| {
                vec![
                    data.words[f.held_out_word].clone(),
                    fmt_opt_usize(f.n_retained),
                    fmt_opt_float(f.baseline_test_rho),
                    fmt_opt_float(f.pruned_test_rho),
                ]
            })
            .collect();
        write_csv(
            &dir.join(format!("{}.folds.csv", cat.name)),
            &["held_out_word", "n_retained", "baseline_test_rho", "pruned_test_rho"],
            &fold_rows,
        )?;

        summary_rows.push(vec![
            cat.name.clone(),
            data.words.len().to_string(),
            file.n_pairs_rated.to_string(),
            file.n_features.to_string(),
            fmt_float(file.solution.baseline_rho),
            file.solution.selected.len().to_string(),
            fmt_float(file.solution.selected_rho),
            fmt_opt_float(file.summary.baseline_test_mean),
            fmt_opt_float(file.summary.baseline_test_sd),
            fmt_opt_float(file.summary.pruned_test_mean),
            fmt_opt_float(file.summary.pruned_test_sd),
            fmt_opt_float(file.summary.retained_mean),
            fmt_opt_float(file.summary.retained_sd),
            fmt_opt_float(file.summary.t),
            fmt_opt_usize(file.summary.dof),
        ]);
        inputs.push(meta_input(&format!("ratings:{}", cat.name), &cat.ratings)?);
    }

    write_csv(
        &dir.join("summary.csv"),
        &[
            "category",
            "n_words",
            "n_pairs_rated",
            "n_features",
            "baseline_rho",
            "selected_size",
            "selected_rho",
            "baseline_test_mean",
            "baseline_test_sd",
            "pruned_test_mean",
            "pruned_test_sd",
            "retained_mean",
            "retained_sd",
            "t",
            "dof",
        ],
        &summary_rows,
    )?;
    write_meta(&dir.join("meta.json"), "prune", json!({}), &inputs)?;
    Ok(())
}
