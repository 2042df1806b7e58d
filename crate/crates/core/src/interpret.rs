//! Interpretation of pruned embeddings.
//!
//! [`pca_first_pc`] projects category words onto the first principal
//! component of their (pruned) embedding rows. [`interpret_category`] then
//! searches the category's corpus context for words whose PMI vector ranks
//! the category the same way those PC1 scores do, applying the frequency,
//! proper-noun/number, coverage, and significance filters in a fixed order
//! and recording survivor counts per stage. Running the same query with the
//! full feature set is the control; [`compare_pruned_full`] counts the
//! overlap between the two hit lists.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cooccur::{category_context, pmi_vector, CorpusStats};
use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::pruner::FeatureSet;
use crate::stats::{spearman_pvalue, spearman_rho};

/// First principal component of a word-by-feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pc1Result<R> {
    pub words: Vec<String>,
    /// Projections of the mean-centered rows onto the component; zero mean.
    pub scores: Vec<R>,
    /// Component direction over the retained features; unit norm, sign
    /// fixed so the largest-magnitude loading is positive.
    pub loadings: Vec<R>,
    pub explained_variance_ratio: R,
}

/// One context word surviving all interpretation filters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretationHit<R> {
    pub word: String,
    pub rho: R,
    pub p: R,
    pub nonzero_fraction: R,
    pub frequency_rank: u32,
}

/// Thresholds for the interpretation filters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpretFilters<R> {
    /// Keep context words whose corpus frequency rank is at most this.
    pub frequency_cutoff: u32,
    /// Keep words whose PMI vector has strictly more than this fraction of
    /// nonzero entries.
    pub nonzero_threshold: R,
    /// Keep words whose correlation p-value is strictly below this.
    pub significance: R,
}

impl<R: Real> Default for InterpretFilters<R> {
    fn default() -> Self {
        Self {
            frequency_cutoff: 15_000,
            nonzero_threshold: R::of(0.6),
            significance: R::of(0.05),
        }
    }
}

/// Survivor counts after each filter stage, applied in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterCounts {
    /// Size of the category context before any filter.
    pub context_size: usize,
    pub after_frequency: usize,
    pub after_exclusions: usize,
    pub after_nonzero: usize,
    pub after_significance: usize,
}

/// Hits plus the per-stage filter bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interpretation<R> {
    pub hits: Vec<InterpretationHit<R>>,
    pub counts: FilterCounts,
}

/// First principal component of the embedding rows restricted to `subset`.
///
/// Needs at least 3 words and 2 retained features. The component is the top
/// eigenvector of the sample covariance, found by power iteration to 1e-10;
/// rows with zero total variance are an error.
pub fn pca_first_pc<R: Real>(
    embedding: &EmbeddingMatrix<R>,
    subset: &FeatureSet,
) -> Result<Pc1Result<R>> {
    let n = embedding.n_words();
    if n < 3 {
        return Err(Error::TooFewWords { required: 3, actual: n });
    }
    if subset.len() < 2 {
        return Err(Error::SubsetTooSmall(subset.len()));
    }
    let cols = subset.indices();
    if let Some(&max) = cols.last() {
        if max >= embedding.n_features() {
            return Err(Error::InvalidInput(format!(
                "feature index {max} out of range for {} features",
                embedding.n_features()
            )));
        }
    }
    let k = cols.len();

    // Column-centered data, then the k x k sample covariance.
    let mut centered = vec![vec![R::zero(); k]; n];
    for (c, &col) in cols.iter().enumerate() {
        let mut mean = R::zero();
        for w in 0..n {
            mean += embedding.row(w)[col];
        }
        mean /= R::of_usize(n);
        for (w, row) in centered.iter_mut().enumerate() {
            row[c] = embedding.row(w)[col] - mean;
        }
    }
    let denom = R::of_usize(n - 1);
    let mut cov = vec![vec![R::zero(); k]; k];
    for a in 0..k {
        for b in a..k {
            let mut s = R::zero();
            for row in &centered {
                s += row[a] * row[b];
            }
            let v = s / denom;
            cov[a][b] = v;
            cov[b][a] = v;
        }
    }
    let mut trace = R::zero();
    for (a, row) in cov.iter().enumerate() {
        trace += row[a];
    }
    if trace.is_zero() {
        return Err(Error::DegenerateData("all words identical over the feature subset".into()));
    }

    let loadings = top_eigenvector(&cov)?;
    // Sign rule: the largest-magnitude loading is positive.
    let mut arg = 0;
    for (i, &v) in loadings.iter().enumerate() {
        if v.abs() > loadings[arg].abs() {
            arg = i;
        }
    }
    let flip = loadings[arg] < R::zero();
    let loadings: Vec<R> =
        loadings.into_iter().map(|v| if flip { -v } else { v }).collect();

    let scores: Vec<R> = centered
        .iter()
        .map(|row| {
            let mut s = R::zero();
            for c in 0..k {
                s += row[c] * loadings[c];
            }
            s
        })
        .collect();
    // Rayleigh quotient of the converged direction = top eigenvalue.
    let mut lambda = R::zero();
    for a in 0..k {
        let mut cv = R::zero();
        for b in 0..k {
            cv += cov[a][b] * loadings[b];
        }
        lambda += loadings[a] * cv;
    }
    Ok(Pc1Result {
        words: embedding.words().to_vec(),
        scores,
        loadings,
        explained_variance_ratio: lambda / trace,
    })
}

/// Power iteration for the top eigenvector of a symmetric PSD matrix.
/// Deterministic start (largest-norm column), tolerance 1e-10.
fn top_eigenvector<R: Real>(m: &[Vec<R>]) -> Result<Vec<R>> {
    let k = m.len();
    let col_norm = |c: usize| -> R {
        let mut s = R::zero();
        for row in m {
            s += row[c] * row[c];
        }
        s
    };
    let mut start = 0;
    for c in 1..k {
        if col_norm(c) > col_norm(start) {
            start = c;
        }
    }
    let mut v: Vec<R> = m.iter().map(|row| row[start]).collect();
    let norm = |v: &[R]| -> R {
        let mut s = R::zero();
        for &x in v {
            s += x * x;
        }
        s.sqrt()
    };
    let n0 = norm(&v);
    if n0.is_zero() {
        return Err(Error::DegenerateData("zero covariance matrix".into()));
    }
    for x in &mut v {
        *x /= n0;
    }
    let tol = R::of(1e-10);
    for _ in 0..10_000 {
        let mut next = vec![R::zero(); k];
        for a in 0..k {
            let mut s = R::zero();
            for b in 0..k {
                s += m[a][b] * v[b];
            }
            next[a] = s;
        }
        let nn = norm(&next);
        if nn.is_zero() {
            return Err(Error::DegenerateData("power iteration collapsed".into()));
        }
        for x in &mut next {
            *x /= nn;
        }
        let mut delta = R::zero();
        for a in 0..k {
            delta = delta.max((next[a] - v[a]).abs());
        }
        v = next;
        if delta <= tol {
            break;
        }
    }
    Ok(v)
}

enum Stage<R> {
    FailedFrequency,
    FailedExclusion,
    FailedNonzero,
    FailedSignificance,
    Hit(InterpretationHit<R>),
}

/// Correlates every category-context word's PMI vector with the PC1 scores
/// and keeps the filtered hits, ranked by |rho| descending then word.
///
/// `category` must equal `pc1.words` (same words, same order); it needs at
/// least 4 entries so the correlation p-value is defined. Filters run in
/// the order frequency cutoff, proper-noun/number exclusion, nonzero
/// coverage, significance; survivor counts are recorded per stage. A word
/// whose PMI vector is constant carries no rank information and fails the
/// significance stage.
pub fn interpret_category<R: Real>(
    stats: &CorpusStats,
    pc1: &Pc1Result<R>,
    category: &[String],
    filters: &InterpretFilters<R>,
) -> Result<Interpretation<R>> {
    if category != pc1.words.as_slice() {
        return Err(Error::InvalidInput(
            "category word list does not match the PC1 word order".into(),
        ));
    }
    if category.len() < 4 {
        return Err(Error::InsufficientSamples { required: 4, actual: category.len() });
    }
    let context: Vec<String> = category_context(stats, category).into_iter().collect();
    let stages: Vec<Stage<R>> = context
        .par_iter()
        .map(|word| -> Result<Stage<R>> {
            let rank = stats.frequency_rank(word)?;
            if rank > filters.frequency_cutoff {
                return Ok(Stage::FailedFrequency);
            }
            let cap: R = stats.capitalized_fraction(word)?;
            let is_proper = cap > R::of(0.5);
            let has_digit = word.chars().any(|c| c.is_ascii_digit());
            if is_proper || has_digit {
                return Ok(Stage::FailedExclusion);
            }
            let vector = pmi_vector::<R>(stats, word, category)?;
            if vector.nonzero_fraction <= filters.nonzero_threshold {
                return Ok(Stage::FailedNonzero);
            }
            let rho = match spearman_rho(&vector.values, &pc1.scores) {
                Ok(r) => r,
                Err(Error::ConstantSeries) => return Ok(Stage::FailedSignificance),
                Err(e) => return Err(e),
            };
            let p = spearman_pvalue(rho, vector.values.len())?;
            if p >= filters.significance {
                return Ok(Stage::FailedSignificance);
            }
            Ok(Stage::Hit(InterpretationHit {
                word: word.clone(),
                rho,
                p,
                nonzero_fraction: vector.nonzero_fraction,
                frequency_rank: rank,
            }))
        })
        .collect::<Result<_>>()?;

    let mut counts = FilterCounts {
        context_size: context.len(),
        after_frequency: 0,
        after_exclusions: 0,
        after_nonzero: 0,
        after_significance: 0,
    };
    let mut hits = Vec::new();
    for stage in stages {
        match stage {
            Stage::FailedFrequency => {}
            Stage::FailedExclusion => counts.after_frequency += 1,
            Stage::FailedNonzero => {
                counts.after_frequency += 1;
                counts.after_exclusions += 1;
            }
            Stage::FailedSignificance => {
                counts.after_frequency += 1;
                counts.after_exclusions += 1;
                counts.after_nonzero += 1;
            }
            Stage::Hit(hit) => {
                counts.after_frequency += 1;
                counts.after_exclusions += 1;
                counts.after_nonzero += 1;
                counts.after_significance += 1;
                hits.push(hit);
            }
        }
    }
    hits.sort_by(|a, b| {
        b.rho
            .abs()
            .partial_cmp(&a.rho.abs())
            .expect("finite correlations")
            .then_with(|| a.word.cmp(&b.word))
    });
    Ok(Interpretation { hits, counts })
}

/// Overlap between the pruned-embedding and full-embedding hit lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitComparison {
    pub n_pruned: usize,
    pub n_full: usize,
    pub n_common: usize,
    /// Sorted words present in both lists.
    pub common_words: Vec<String>,
}

/// Counts hits unique to and shared between two hit lists (order-free).
pub fn compare_pruned_full<R>(
    pruned: &[InterpretationHit<R>],
    full: &[InterpretationHit<R>],
) -> HitComparison {
    let full_words: std::collections::BTreeSet<&str> =
        full.iter().map(|h| h.word.as_str()).collect();
    let mut common_words: Vec<String> = pruned
        .iter()
        .filter(|h| full_words.contains(h.word.as_str()))
        .map(|h| h.word.clone())
        .collect();
    common_words.sort();
    HitComparison {
        n_pruned: pruned.len(),
        n_full: full.len(),
        n_common: common_words.len(),
        common_words,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooccur::count_text;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn embedding_from(data: ndarray::Array2<f64>, names: &[&str]) -> EmbeddingMatrix<f64> {
        EmbeddingMatrix::new(names.iter().map(|s| s.to_string()).collect(), data).unwrap()
    }

    #[test]
    fn single_varying_feature_gives_exact_scores() {
        let e = embedding_from(
            array![[1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [4.0, 0.0]],
            &["c1", "c2", "c3", "c4"],
        );
        let pc1 = pca_first_pc(&e, &FeatureSet::full(2)).unwrap();
        assert_eq!(pc1.scores, vec![-1.5, -0.5, 0.5, 1.5]);
        assert_eq!(pc1.loadings, vec![1.0, 0.0]);
        assert_eq!(pc1.explained_variance_ratio, 1.0);
    }

    #[test]
    fn collinear_points_have_unit_variance_ratio() {
        // Three points on the line y = 2x.
        let e = embedding_from(array![[0.0, 0.0], [1.0, 2.0], [2.0, 4.0]], &["a", "b", "c"]);
        let pc1 = pca_first_pc(&e, &FeatureSet::full(2)).unwrap();
        assert_relative_eq!(pc1.explained_variance_ratio, 1.0, max_relative = 1e-12);
        let mean: f64 = pc1.scores.iter().sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-12);
        // Largest loading (the y direction) is positive.
        assert!(pc1.loadings[1] > 0.0);
    }

    #[test]
    fn matches_power_iteration_oracle() {
        let data = array![
            [0.2, -1.1, 0.7],
            [1.5, 0.3, -0.4],
            [-0.9, 0.8, 1.2],
            [0.4, -0.2, -0.6],
            [-1.0, 1.4, 0.1],
        ];
        let e = embedding_from(data.clone(), &["v", "w", "x", "y", "z"]);
        let pc1 = pca_first_pc(&e, &FeatureSet::full(3)).unwrap();

        // Independent oracle: explicit covariance, long fixed-count power
        // iteration from a different start vector.
        let n = 5;
        let k = 3;
        let mut centered = data.clone();
        for c in 0..k {
            let mean = data.column(c).sum() / n as f64;
            for r in 0..n {
                centered[[r, c]] -= mean;
            }
        }
        let mut cov = vec![vec![0.0f64; k]; k];
        for a in 0..k {
            for b in 0..k {
                let mut s = 0.0;
                for r in 0..n {
                    s += centered[[r, a]] * centered[[r, b]];
                }
                cov[a][b] = s / (n - 1) as f64;
            }
        }
        let mut v = vec![1.0f64, 1.0, 1.0];
        for _ in 0..50_000 {
            let mut next = vec![0.0f64; k];
            for a in 0..k {
                for b in 0..k {
                    next[a] += cov[a][b] * v[b];
                }
            }
            let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
            v = next.iter().map(|x| x / norm).collect();
        }
        let oracle: Vec<f64> =
            (0..n).map(|r| (0..k).map(|c| centered[[r, c]] * v[c]).sum()).collect();
        // Align the arbitrary oracle sign with the implementation's.
        let dot: f64 = oracle.iter().zip(&pc1.scores).map(|(a, b)| a * b).sum();
        let sign = if dot < 0.0 { -1.0 } else { 1.0 };
        for (got, want) in pc1.scores.iter().zip(&oracle) {
            assert!((got - sign * want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn column_shift_leaves_scores_unchanged() {
        let data = array![
            [0.2, -1.1, 0.7],
            [1.5, 0.3, -0.4],
            [-0.9, 0.8, 1.2],
            [0.4, -0.2, -0.6],
        ];
        let e = embedding_from(data.clone(), &["a", "b", "c", "d"]);
        let base = pca_first_pc(&e, &FeatureSet::full(3)).unwrap();
        let mut shifted = data;
        for r in 0..4 {
            shifted[[r, 1]] += 100.0;
        }
        let e2 = embedding_from(shifted, &["a", "b", "c", "d"]);
        let moved = pca_first_pc(&e2, &FeatureSet::full(3)).unwrap();
        for (a, b) in base.scores.iter().zip(&moved.scores) {
            assert_relative_eq!(a, b, max_relative = 1e-9, epsilon = 1e-9);
        }
        assert_relative_eq!(
            base.explained_variance_ratio,
            moved.explained_variance_ratio,
            max_relative = 1e-9
        );
    }

    #[test]
    fn degenerate_inputs_error() {
        let e = embedding_from(array![[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]], &["a", "b", "c"]);
        assert!(matches!(
            pca_first_pc(&e, &FeatureSet::full(2)),
            Err(Error::DegenerateData(_))
        ));
        let tiny = embedding_from(array![[1.0, 2.0], [3.0, 4.0]], &["a", "b"]);
        assert!(matches!(
            pca_first_pc(&tiny, &FeatureSet::full(2)),
            Err(Error::TooFewWords { required: 3, actual: 2 })
        ));
    }

    /// Corpus built so that, against category c1 < c2 < c3 < c4 in PC1
    /// order: "w" correlates +1, "y" correlates -1, "x" covers only 1 of 4
    /// category words, "Bob" is a proper noun, "99" is a number, and
    /// "rare" falls outside the frequency cutoff.
    fn crafted() -> (CorpusStats, Pc1Result<f64>, Vec<String>) {
        let mut text = String::new();
        for (count, line) in [
            (1, "w c1"),
            (2, "w c2"),
            (4, "w c3"),
            (8, "w c4"),
            (8, "y c1"),
            (4, "y c2"),
            (2, "y c3"),
            (1, "y c4"),
            (2, "x c1"),
            (2, "Bob c2"),
            (2, "c3 99"),
            (1, "rare c4"),
        ] {
            for _ in 0..count {
                text.push_str(line);
                text.push('\n');
            }
        }
        let stats = count_text(&text, 2).unwrap();
        let e = embedding_from(
            array![[1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [4.0, 0.0]],
            &["c1", "c2", "c3", "c4"],
        );
        let pc1 = pca_first_pc(&e, &FeatureSet::full(2)).unwrap();
        let category: Vec<String> = ["c1", "c2", "c3", "c4"].iter().map(|s| s.to_string()).collect();
        (stats, pc1, category)
    }

    #[test]
    fn filters_apply_in_order_with_stage_counts() {
        let (stats, pc1, category) = crafted();
        let filters = InterpretFilters { frequency_cutoff: 9, ..Default::default() };
        let result = interpret_category(&stats, &pc1, &category, &filters).unwrap();
        assert_eq!(result.counts.context_size, 6);
        assert_eq!(result.counts.after_frequency, 5, "rare drops at the cutoff");
        assert_eq!(result.counts.after_exclusions, 3, "Bob and 99 drop");
        assert_eq!(result.counts.after_nonzero, 2, "x drops at 1/4 coverage");
        assert_eq!(result.counts.after_significance, 2);
        assert_eq!(result.hits.len(), 2);
        // |rho| ties at 1.0; lexicographic word order breaks it.
        assert_eq!(result.hits[0].word, "w");
        assert_eq!(result.hits[0].rho, 1.0);
        assert_eq!(result.hits[1].word, "y");
        assert_eq!(result.hits[1].rho, -1.0);
        for hit in &result.hits {
            assert!(hit.p < filters.significance);
            assert!(hit.nonzero_fraction > filters.nonzero_threshold);
            assert!(hit.frequency_rank <= filters.frequency_cutoff);
        }
    }

    #[test]
    fn default_cutoff_keeps_rare_word_out_only_when_low() {
        let (stats, pc1, category) = crafted();
        // With a generous cutoff "rare" passes frequency but fails coverage.
        let filters = InterpretFilters { frequency_cutoff: 15_000, ..Default::default() };
        let result = interpret_category(&stats, &pc1, &category, &filters).unwrap();
        assert_eq!(result.counts.context_size, 6);
        assert_eq!(result.counts.after_frequency, 6);
        assert_eq!(result.counts.after_exclusions, 4);
        assert_eq!(result.counts.after_nonzero, 2);
        assert_eq!(result.hits.len(), 2);
    }

    #[test]
    fn rejects_mismatched_category() {
        let (stats, pc1, mut category) = crafted();
        category.swap(0, 1);
        assert!(matches!(
            interpret_category(&stats, &pc1, &category, &InterpretFilters::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn comparison_counts_common_words() {
        let hit = |w: &str, rho: f64| InterpretationHit {
            word: w.into(),
            rho,
            p: 0.01,
            nonzero_fraction: 0.8,
            frequency_rank: 10,
        };
        let pruned = vec![hit("alpha", 0.9), hit("beta", -0.8)];
        let full = vec![hit("beta", -0.7), hit("gamma", 0.6)];
        let cmp = compare_pruned_full(&pruned, &full);
        assert_eq!((cmp.n_pruned, cmp.n_full, cmp.n_common), (2, 2, 1));
        assert_eq!(cmp.common_words, vec!["beta".to_string()]);
        let same = compare_pruned_full(&pruned, &pruned);
        assert_eq!(same.n_common, 2);
        let disjoint = compare_pruned_full(&pruned, &[]);
        assert_eq!(disjoint.n_common, 0);
    }
}
