//! Supervised feature pruning.
//!
//! Given an embedding and human similarity ratings over the same words, the
//! pruner scores each feature by how much the model-human fit drops when
//! that feature is left out, re-inserts features in score order while
//! tracking the fit of each prefix, and selects the smallest prefix with the
//! best fit. Leave-one-word-out cross-validation wraps the whole procedure
//! to measure generalization, and Dice overlaps compare selections across
//! categories.
//!
//! Work budget (RSM builds, observable via [`crate::instrument`]): with `F`
//! features, [`rank_features`] builds `F + 1` similarity matrices,
//! [`reinsertion_curve`] builds `F - 1`, and [`prune`] builds exactly `2F`.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::rsm::{
    build_rsm, make_folds, second_order_fit, PairIndex, SimilarityStructure,
};
use crate::stats::{dice, paired_t};

/// A set of feature column indices, kept sorted and deduplicated so that
/// equal sets compare equal and subset builds are canonical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", from = "Vec<usize>")]
pub struct FeatureSet {
    indices: Vec<usize>,
}

impl FeatureSet {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    /// All features `0..n`.
    pub fn full(n: usize) -> Self {
        Self { indices: (0..n).collect() }
    }

    /// All features `0..n` except `leave_out`.
    pub fn without(n: usize, leave_out: usize) -> Self {
        Self { indices: (0..n).filter(|&i| i != leave_out).collect() }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Sorted ascending.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, feature: usize) -> bool {
        self.indices.binary_search(&feature).is_ok()
    }

    pub fn to_btree_set(&self) -> BTreeSet<usize> {
        self.indices.iter().copied().collect()
    }
}

impl From<Vec<usize>> for FeatureSet {
    fn from(v: Vec<usize>) -> Self {
        Self::new(v)
    }
}

impl From<FeatureSet> for Vec<usize> {
    fn from(s: FeatureSet) -> Vec<usize> {
        s.indices
    }
}

/// Features ordered by importance.
///
/// `fit_drop[f]` is the drop in model-human fit when feature `f` alone is
/// left out of the full set; `order` lists all features by descending drop,
/// ties broken by ascending index. `baseline_rho` is the fit of the full
/// feature set, shared so downstream steps need not rebuild it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking<R> {
    pub order: Vec<usize>,
    pub fit_drop: Vec<R>,
    pub baseline_rho: R,
}

/// Result of pruning one category.
///
/// `curve[k-1]` is the fit of the first `k` ranked features; the size-1
/// prefix cannot be evaluated (a single feature admits no correlation
/// between word vectors) and holds the minimum representable value so it is
/// never selected. `selected` is the smallest prefix attaining the curve
/// maximum, hence always at least 2 features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneSolution<R> {
    pub baseline_rho: R,
    pub ranking: FeatureRanking<R>,
    pub curve: Vec<R>,
    pub selected: FeatureSet,
    pub selected_rho: R,
}

/// Scores every feature by leave-one-out fit drop against `human` over
/// `pairs` and returns the descending-importance order.
///
/// `pairs` must be covered by `human`; needs at least 3 features (a
/// leave-one-out subset must still allow correlations) and 3 pairs.
pub fn rank_features<R: Real>(
    embedding: &EmbeddingMatrix<R>,
    human: &SimilarityStructure<R>,
    pairs: &PairIndex,
) -> Result<FeatureRanking<R>> {
    let f = embedding.n_features();
    if f < 3 {
        return Err(Error::InvalidInput(format!(
            "leave-one-out ranking needs at least 3 features, got {f}"
        )));
    }
    if pairs.len() < 3 {
        return Err(Error::InsufficientSamples { required: 3, actual: pairs.len() });
    }
    let full = build_rsm(embedding, &FeatureSet::full(f))?;
    let baseline_rho = second_order_fit(&full, human, pairs)?;
    let fit_drop: Vec<R> = (0..f)
        .into_par_iter()
        .map(|leave_out| -> Result<R> {
            let rsm = build_rsm(embedding, &FeatureSet::without(f, leave_out))?;
            Ok(baseline_rho - second_order_fit(&rsm, human, pairs)?)
        })
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..f).collect();
    order.sort_unstable_by(|&a, &b| {
        fit_drop[b]
            .partial_cmp(&fit_drop[a])
            .expect("fit drops are finite")
            .then(a.cmp(&b))
    });
    Ok(FeatureRanking { order, fit_drop, baseline_rho })
}

/// Fit of each prefix of the ranking, from size 1 to all features.
///
/// The size-1 entry is the minimum representable value (unevaluable, never
/// selectable). A prefix whose model similarities are constant over `pairs`
/// carries no rank information and is likewise recorded as the sentinel,
/// with a warning. The full-size entry reproduces the baseline fit
/// bit-for-bit.
pub fn reinsertion_curve<R: Real>(
    embedding: &EmbeddingMatrix<R>,
    human: &SimilarityStructure<R>,
    pairs: &PairIndex,
    ranking: &FeatureRanking<R>,
) -> Result<Vec<R>> {
    let f = embedding.n_features();
    if ranking.order.len() != f {
        return Err(Error::InvalidInput(format!(
            "ranking covers {} features but the embedding has {f}",
            ranking.order.len()
        )));
    }
    let mut seen = vec![false; f];
    for &i in &ranking.order {
        if i >= f || seen[i] {
            return Err(Error::InvalidInput("ranking order is not a permutation".into()));
        }
        seen[i] = true;
    }
    let tail: Vec<R> = (2..=f)
        .into_par_iter()
        .map(|k| -> Result<R> {
            let prefix = FeatureSet::new(ranking.order[..k].iter().copied());
            let rsm = build_rsm(embedding, &prefix)?;
            match second_order_fit(&rsm, human, pairs) {
                Ok(fit) => Ok(fit),
                Err(Error::ConstantSeries) => {
                    log::warn!("prefix of size {k} has constant similarities; marked unselectable");
                    Ok(R::min_value())
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut curve = Vec::with_capacity(f);
    curve.push(R::min_value());
    curve.extend(tail);
    Ok(curve)
}

/// Full pruning pass: rank features, evaluate the reinsertion curve, and
/// select the smallest prefix attaining the maximum fit.
pub fn prune<R: Real>(
    embedding: &EmbeddingMatrix<R>,
    human: &SimilarityStructure<R>,
    pairs: &PairIndex,
) -> Result<PruneSolution<R>> {
    let ranking = rank_features(embedding, human, pairs)?;
    let curve = reinsertion_curve(embedding, human, pairs, &ranking)?;
    let mut best_k = 0;
    for (k, &fit) in curve.iter().enumerate() {
        if fit > curve[best_k] {
            best_k = k;
        }
    }
    let selected_rho = curve[best_k];
    if selected_rho == R::min_value() {
        return Err(Error::InvalidInput(
            "no evaluable prefix: every reinsertion step was degenerate".into(),
        ));
    }
    let selected = FeatureSet::new(ranking.order[..=best_k].iter().copied());
    Ok(PruneSolution {
        baseline_rho: ranking.baseline_rho,
        ranking,
        curve,
        selected,
        selected_rho,
    })
}

/// One leave-one-word-out fold of [`cross_validate`].
///
/// `None` fits mark a degenerate fold (constant or undersized series
/// somewhere in training or testing); such folds are excluded from the
/// t-test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult<R> {
    pub held_out_word: usize,
    pub n_retained: Option<usize>,
    pub baseline_test_rho: Option<R>,
    pub pruned_test_rho: Option<R>,
}

impl<R> FoldResult<R> {
    pub fn is_degenerate(&self) -> bool {
        self.baseline_test_rho.is_none() || self.pruned_test_rho.is_none()
    }
}

/// Leave-one-word-out cross-validation of the pruner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation<R> {
    pub folds: Vec<FoldResult<R>>,
    /// Paired t over (pruned, baseline) test fits of the non-degenerate
    /// folds; `None` when fewer than 2 folds survive or the differences
    /// have zero variance.
    pub t_statistic: Option<(R, usize)>,
}

/// Prunes once per leave-one-word-out fold (training pairs only) and scores
/// both the pruned and the full feature set on the held-out pairs.
///
/// `human` must be indexed against the embedding's word order. Pairs the
/// human data does not cover are dropped from both halves of each fold;
/// folds that become degenerate are recorded with `None` fits and a warning
/// rather than failing the run.
pub fn cross_validate<R: Real>(
    embedding: &EmbeddingMatrix<R>,
    human: &SimilarityStructure<R>,
) -> Result<CrossValidation<R>> {
    let folds = make_folds(embedding.n_words())?;
    let full_rsm = build_rsm(embedding, &FeatureSet::full(embedding.n_features()))?;

    // Degenerate data inside a fold (constant series, too few usable pairs)
    // invalidates that fold only; anything else is a real error.
    fn soften<T>(r: Result<T>) -> Result<Option<T>> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(Error::ConstantSeries) | Err(Error::InsufficientSamples { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    let results: Vec<FoldResult<R>> = folds
        .par_iter()
        .map(|fold| -> Result<FoldResult<R>> {
            let train = human.known_pairs(&fold.train_pairs);
            let test = human.known_pairs(&fold.test_pairs);
            let solution = soften(prune(embedding, human, &train))?;
            let (n_retained, pruned_test_rho) = match &solution {
                Some(sol) => {
                    let pruned_rsm = build_rsm(embedding, &sol.selected)?;
                    (
                        Some(sol.selected.len()),
                        soften(second_order_fit(&pruned_rsm, human, &test))?,
                    )
                }
                None => (None, None),
            };
            let baseline_test_rho = soften(second_order_fit(&full_rsm, human, &test))?;
            Ok(FoldResult {
                held_out_word: fold.held_out_word,
                n_retained,
                baseline_test_rho,
                pruned_test_rho,
            })
        })
        .collect::<Result<_>>()?;

    let degenerate = results.iter().filter(|r| r.is_degenerate()).count();
    if degenerate > 0 {
        log::warn!("{degenerate} of {} folds degenerate; excluded from the t-test", results.len());
    }
    let mut pruned = Vec::new();
    let mut baseline = Vec::new();
    for r in &results {
        if let (Some(p), Some(b)) = (r.pruned_test_rho, r.baseline_test_rho) {
            pruned.push(p);
            baseline.push(b);
        }
    }
    let t_statistic = match paired_t(&pruned, &baseline) {
        Ok(t) => Some(t),
        Err(Error::ZeroVariance) | Err(Error::InsufficientSamples { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(CrossValidation { folds: results, t_statistic })
}

/// How many of the given selections retain each feature.
pub fn retention_counts(selections: &[FeatureSet], n_features: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; n_features];
    for set in selections {
        for &f in set.indices() {
            if f >= n_features {
                return Err(Error::InvalidInput(format!(
                    "feature index {f} out of range for {n_features} features"
                )));
            }
            counts[f] += 1;
        }
    }
    Ok(counts)
}

/// Pairwise Dice overlap between selections. Symmetric with a unit
/// diagonal; requires at least 2 non-empty selections.
pub fn overlap_matrix<R: Real>(selections: &[FeatureSet]) -> Result<Vec<Vec<R>>> {
    if selections.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "overlap needs at least 2 selections, got {}",
            selections.len()
        )));
    }
    let sets: Vec<BTreeSet<usize>> = selections.iter().map(FeatureSet::to_btree_set).collect();
    let mut matrix = vec![vec![R::zero(); sets.len()]; sets.len()];
    for i in 0..sets.len() {
        for j in 0..sets.len() {
            matrix[i][j] = dice(&sets[i], &sets[j])?;
        }
    }
    Ok(matrix)
}
