//! `probe`: predict rated semantic dimensions from each category's top-k
//! ranked features under leave-one-word-out cross validation, and assemble
//! the per-area score matrix.

use std::collections::BTreeSet;
use std::path::PathBuf;

use semprune::probe::{probe_all, read_norms};
use semprune::{EmbeddingMatrix64, PruneSolution64, SemanticNorms64};
use serde_json::json;

use crate::artifacts::{ensure_dir, fmt_float, meta_input, write_csv, write_json, write_meta};
use crate::config::{require, Config};
use crate::errors::{CliError, CliResult};
use crate::solution::load_solution;

pub fn run(config: &Config, files: &[PathBuf]) -> CliResult<()> {
    let embedding_path = require(&config.embedding, "embedding")?;
    let ratings_path = require(&config.norms_ratings, "norms_ratings")?;
    let areas_path = require(&config.norms_areas, "norms_areas")?;
    let files: Vec<PathBuf> = if files.is_empty() {
        config.categories.iter().map(|c| config.solution_path(&c.name)).collect()
    } else {
        files.to_vec()
    };
    if files.is_empty() {
        return Err(CliError::User(
            "no solution files given and no categories configured".into(),
        ));
    }
    let solutions: Vec<_> = files.iter().map(|p| load_solution(p)).collect::<CliResult<_>>()?;

    let norms: SemanticNorms64 = read_norms(ratings_path, areas_path)?;
    let keep: BTreeSet<String> = norms.words.iter().cloned().collect();
    let embedding = EmbeddingMatrix64::read_text_filtered(embedding_path, &keep)?;

    let categories: Vec<(String, PruneSolution64)> =
        solutions.iter().map(|s| (s.category.clone(), s.solution.clone())).collect();
    let matrix =
        probe_all(&categories, &embedding, &norms, config.probe_k, config.components)?;

    let dir = config.output_dir.join("probe");
    ensure_dir(&dir)?;

    for report in &matrix.reports {
        let rows: Vec<Vec<String>> = report
            .dims
            .iter()
            .zip(&norms.dim_areas)
            .zip(&report.per_dimension_rho)
            .map(|((dim, area), &rho)| vec![dim.clone(), area.clone(), fmt_float(rho)])
            .collect();
        write_csv(
            &dir.join(format!("{}.dimensions.csv", report.category)),
            &["dimension", "area", "rho"],
            &rows,
        )?;
        write_json(&dir.join(format!("{}.report.json", report.category)), report)?;
        println!(
            "{}: probed {} words on {} dimensions with top-{} features",
            report.category,
            report.words_used.len(),
            report.dims.len(),
            report.n_features_used,
        );
    }

    let mut header: Vec<&str> = vec!["category"];
    header.extend(matrix.areas.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = matrix
        .categories
        .iter()
        .zip(&matrix.rows)
        .map(|(name, row)| {
            let mut out = vec![name.clone()];
            out.extend(row.iter().map(|&v| fmt_float(v)));
            out
        })
        .collect();
    write_csv(&dir.join("matrix.csv"), &header, &rows)?;

    let mut inputs = vec![
        meta_input("embedding", embedding_path)?,
        meta_input("norms_ratings", ratings_path)?,
        meta_input("norms_areas", areas_path)?,
    ];
    for file in &files {
        inputs.push(meta_input("solution", file)?);
    }
    write_meta(
        &dir.join("meta.json"),
        "probe",
        json!({ "probe_k": config.probe_k, "components": config.components }),
        &inputs,
    )?;
    Ok(())
}
