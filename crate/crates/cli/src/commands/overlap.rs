//! `overlap`: Dice similarity of selected feature sets across categories,
//! plus how many categories retain each feature.

use std::path::PathBuf;

use semprune::pruner::{overlap_matrix, retention_counts, FeatureSet};
use serde_json::json;

use crate::artifacts::{ensure_dir, fmt_float, meta_input, write_csv, write_meta};
use crate::config::Config;
use crate::errors::{CliError, CliResult};
use crate::solution::load_solution;

pub fn run(config: &Config, files: &[PathBuf]) -> CliResult<()> {
    let files: Vec<PathBuf> = if files.is_empty() {
        config.categories.iter().map(|c| config.solution_path(&c.name)).collect()
    } else {
        files.to_vec()
    };
    if files.len() < 2 {
        return Err(CliError::User(format!(
            "overlap needs at least 2 solution files, got {}",
            files.len()
        )));
    }
    let solutions: Vec<_> = files.iter().map(|p| load_solution(p)).collect::<CliResult<_>>()?;
    let n_features = solutions[0].n_features;
    for s in &solutions {
        if s.n_features != n_features {
            return Err(CliError::User(format!(
                "solution {:?} has {} features but {:?} has {n_features}; \
                 overlap needs a shared feature space",
                s.category, s.n_features, solutions[0].category
            )));
        }
    }
    let names: Vec<String> = solutions.iter().map(|s| s.category.clone()).collect();
    let sets: Vec<FeatureSet> = solutions.iter().map(|s| s.solution.selected.clone()).collect();
    let matrix: Vec<Vec<f64>> = overlap_matrix(&sets)?;
    let counts = retention_counts(&sets, n_features)?;

    let dir = config.output_dir.join("overlap");
    ensure_dir(&dir)?;

    let mut header: Vec<&str> = vec!["category"];
    header.extend(names.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = names
        .iter()
        .zip(&matrix)
        .map(|(name, row)| {
            let mut out = vec![name.clone()];
            out.extend(row.iter().map(|&v| fmt_float(v)));
            out
        })
        .collect();
    write_csv(&dir.join("dice_matrix.csv"), &header, &rows)?;

    let count_rows: Vec<Vec<String>> = counts
        .iter()
        .enumerate()
        .map(|(feature, &n)| vec![feature.to_string(), n.to_string()])
        .collect();
    write_csv(&dir.join("retention_counts.csv"), &["feature_index", "n_categories"], &count_rows)?;

    let inputs: Vec<_> = files
        .iter()
        .map(|p| meta_input("solution", p))
        .collect::<CliResult<_>>()?;
    write_meta(&dir.join("meta.json"), "overlap", json!({ "n_features": n_features }), &inputs)?;

    let mut off_diagonal = Vec::new();
    for (i, row) in matrix.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if i < j {
                off_diagonal.push(v);
            }
        }
    }
    let mean = off_diagonal.iter().sum::<f64>() / off_diagonal.len() as f64;
    println!("dice overlap across {} categories: mean off-diagonal {mean:.3}", names.len());
    Ok(())
}
