//! The per-category solution artifact shared between commands.

use std::path::Path;

use serde::{Deserialize, Serialize};
use semprune::{CrossValidation64, PruneSolution64};

use crate::errors::{CliError, CliResult};

/// Everything downstream commands need about one pruned category: the word
/// order the feature space was fit against, the solution itself, and the
/// cross-validated generalization summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub category: String,
    /// Category words in the index order used for pairs and folds.
    pub words: Vec<String>,
    pub n_features: usize,
    /// Word pairs with a human rating.
    pub n_pairs_rated: usize,
    pub solution: PruneSolution64,
    pub cross_validation: CrossValidation64,
    pub summary: CvSummary,
}

/// Fold-level aggregates over the non-degenerate folds (sd absent with a
/// single usable fold, t absent when undefined).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvSummary {
    pub n_folds: usize,
    pub n_degenerate_folds: usize,
    pub baseline_test_mean: Option<f64>,
    pub baseline_test_sd: Option<f64>,
    pub pruned_test_mean: Option<f64>,
    pub pruned_test_sd: Option<f64>,
    pub retained_mean: Option<f64>,
    pub retained_sd: Option<f64>,
    pub t: Option<f64>,
    pub dof: Option<usize>,
}

pub fn load_solution(path: &Path) -> CliResult<SolutionFile> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::User(format!("cannot read solution file {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::User(format!("invalid solution file {}: {e}", path.display()))
    })
}
