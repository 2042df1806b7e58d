//! Representational similarity structures.
//!
//! A similarity structure assigns one value to each word pair in a
//! [`PairIndex`]. Model-side structures come from [`build_rsm`] (pairwise
//! Pearson between embedding rows restricted to a feature subset); human-side
//! structures come from rating files. [`second_order_fit`] compares the two
//! by Spearman rank agreement over a shared set of pairs, and [`make_folds`]
//! partitions the complete pair set for leave-one-word-out cross-validation.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::instrument;
use crate::num::{clamp_unit, Real};
use crate::pruner::FeatureSet;
use crate::stats::spearman_rho;

/// Canonical list of word-index pairs: every pair is stored as `(i, j)` with
/// `i < j`, and the list is sorted lexicographically with no duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairIndex {
    pairs: Vec<(usize, usize)>,
}

impl PairIndex {
    /// Normalizes, sorts, and validates an arbitrary pair list. Self-pairs
    /// and duplicates (after normalization) are rejected.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut normalized: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(a, b)| {
                if a == b {
                    Err(Error::InvalidInput(format!("self-pair ({a}, {a}) is not allowed")))
                } else {
                    Ok((a.min(b), a.max(b)))
                }
            })
            .collect::<Result<_>>()?;
        normalized.sort_unstable();
        if normalized.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate pair in index".into()));
        }
        Ok(Self { pairs: normalized })
    }

    /// All `n * (n - 1) / 2` pairs over `n` words, lexicographic.
    pub fn complete(n: usize) -> Self {
        let mut pairs = Vec::with_capacity(n.saturating_sub(1) * n / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j));
            }
        }
        Self { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    /// Position of `(i, j)` (order-insensitive) in the canonical list.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        if i == j {
            return None;
        }
        let key = (i.min(j), i.max(j));
        self.pairs.binary_search(&key).ok()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.position(i, j).is_some()
    }
}

/// Provenance of a similarity structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimilaritySource {
    Human,
    Model,
}

/// One similarity value per pair of a [`PairIndex`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityStructure<R> {
    pairs: PairIndex,
    values: Vec<R>,
    source: SimilaritySource,
    degenerate_pairs: Vec<(usize, usize)>,
}

impl<R: Real> SimilarityStructure<R> {
    pub fn new(pairs: PairIndex, values: Vec<R>, source: SimilaritySource) -> Result<Self> {
        if pairs.len() != values.len() {
            return Err(Error::LengthMismatch { left: pairs.len(), right: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("similarity values must be finite".into()));
        }
        Ok(Self { pairs, values, source, degenerate_pairs: Vec::new() })
    }

    pub fn pairs(&self) -> &PairIndex {
        &self.pairs
    }

    pub fn values(&self) -> &[R] {
        &self.values
    }

    pub fn source(&self) -> SimilaritySource {
        self.source
    }

    /// Pairs whose value was forced to 0 because a word had zero variance
    /// over the feature subset used to build this structure.
    pub fn degenerate_pairs(&self) -> &[(usize, usize)] {
        &self.degenerate_pairs
    }

    /// Value for `(i, j)` in either order, if that pair is present.
    pub fn value(&self, i: usize, j: usize) -> Option<R> {
        self.pairs.position(i, j).map(|p| self.values[p])
    }

    /// Values for `wanted`, in its order. Every requested pair must exist.
    pub fn values_for(&self, wanted: &PairIndex) -> Result<Vec<R>> {
        wanted
            .iter()
            .map(|(i, j)| self.value(i, j).ok_or(Error::MissingPair(i, j)))
            .collect()
    }

    /// The subset of `wanted` that this structure has values for.
    pub fn known_pairs(&self, wanted: &PairIndex) -> PairIndex {
        PairIndex {
            pairs: wanted.iter().filter(|&(i, j)| self.pairs.contains(i, j)).collect(),
        }
    }
}

/// Builds the model similarity structure over all word pairs: for each pair,
/// the Pearson correlation of the two word vectors restricted to `subset`.
///
/// A word whose restricted vector has zero variance makes all its pairs
/// degenerate; those values are set to 0, recorded, and warned about.
///
/// Arithmetic is the canonical two-pass Pearson in ascending feature order,
/// so results are bit-identical to correlating the extracted feature columns
/// pair by pair.
pub fn build_rsm<R: Real>(
    embedding: &EmbeddingMatrix<R>,
    subset: &FeatureSet,
) -> Result<SimilarityStructure<R>> {
    instrument::record_rsm_build();
    if subset.len() < 2 {
        return Err(Error::SubsetTooSmall(subset.len()));
    }
    if let Some(&max) = subset.indices().last() {
        if max >= embedding.n_features() {
            return Err(Error::InvalidInput(format!(
                "feature index {max} out of range for {} features",
                embedding.n_features()
            )));
        }
    }
    let n = embedding.n_words();
    if n < 2 {
        return Err(Error::TooFewWords { required: 2, actual: n });
    }
    let cols = subset.indices();
    let k = R::of_usize(cols.len());

    // Center each restricted row once; per-pair Pearson then reuses the
    // centered vectors and per-word sums of squares. This matches the
    // per-pair two-pass computation bit for bit because the summation order
    // over features is identical.
    let mut centered: Vec<Vec<R>> = Vec::with_capacity(n);
    let mut sum_sq: Vec<R> = Vec::with_capacity(n);
    for w in 0..n {
        let row = embedding.row(w);
        let mut mean = R::zero();
        for &c in cols {
            mean += row[c];
        }
        mean /= k;
        let cv: Vec<R> = cols.iter().map(|&c| row[c] - mean).collect();
        let mut ss = R::zero();
        for &v in &cv {
            ss += v * v;
        }
        centered.push(cv);
        sum_sq.push(ss);
    }

    let pairs = PairIndex::complete(n);
    let mut values = Vec::with_capacity(pairs.len());
    let mut degenerate = Vec::new();
    for (i, j) in pairs.iter() {
        if sum_sq[i].is_zero() || sum_sq[j].is_zero() {
            degenerate.push((i, j));
            values.push(R::zero());
            continue;
        }
        let mut sxy = R::zero();
        for (a, b) in centered[i].iter().zip(&centered[j]) {
            sxy += *a * *b;
        }
        values.push(clamp_unit(sxy / (sum_sq[i] * sum_sq[j]).sqrt()));
    }
    if !degenerate.is_empty() {
        log::warn!(
            "{} word pair(s) degenerate over a {}-feature subset; their similarity is 0",
            degenerate.len(),
            cols.len()
        );
    }
    let mut rsm = SimilarityStructure::new(pairs, values, SimilaritySource::Model)?;
    rsm.degenerate_pairs = degenerate;
    Ok(rsm)
}

/// Rank agreement (second-order isomorphism) between a model and a human
/// similarity structure over `pairs`: Spearman's rho between the two value
/// series in pair order.
pub fn second_order_fit<R: Real>(
    model: &SimilarityStructure<R>,
    human: &SimilarityStructure<R>,
    pairs: &PairIndex,
) -> Result<R> {
    let xs = model.values_for(pairs)?;
    let ys = human.values_for(pairs)?;
    spearman_rho(&xs, &ys)
}

/// One leave-one-word-out fold: the test half is every pair containing the
/// held-out word (`n - 1` pairs), the train half is every other pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSpec {
    pub held_out_word: usize,
    pub test_pairs: PairIndex,
    pub train_pairs: PairIndex,
}

/// Leave-one-word-out folds over `n` words, one per word, in word order.
///
/// Needs `n >= 4` so each fold's test half has at least the 3 pairs a rank
/// correlation requires.
pub fn make_folds(n: usize) -> Result<Vec<FoldSpec>> {
    if n < 4 {
        return Err(Error::TooFewWords { required: 4, actual: n });
    }
    let complete = PairIndex::complete(n);
    let mut folds = Vec::with_capacity(n);
    for target in 0..n {
        let (test, train): (Vec<_>, Vec<_>) =
            complete.iter().partition(|&(i, j)| i == target || j == target);
        folds.push(FoldSpec {
            held_out_word: target,
            test_pairs: PairIndex { pairs: test },
            train_pairs: PairIndex { pairs: train },
        });
    }
    Ok(folds)
}

/// Human pairwise similarity ratings over a category vocabulary.
///
/// `words` is sorted and lowercase; `similarities` is indexed against it and
/// may cover only a subset of all pairs (absent pairs stay absent rather
/// than defaulting).
#[derive(Debug, Clone)]
pub struct HumanRatings<R> {
    pub words: Vec<String>,
    pub similarities: SimilarityStructure<R>,
}

impl<R: Real> HumanRatings<R> {
    /// Index of `word` in the sorted vocabulary.
    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.words.binary_search_by(|w| w.as_str().cmp(word)).ok()
    }

    /// Drops every word not in `keep` (and the pairs touching it),
    /// reindexing against the surviving vocabulary. Returns the restricted
    /// ratings and the sorted list of dropped words.
    pub fn restrict_to(&self, keep: &BTreeSet<String>) -> Result<(Self, Vec<String>)> {
        let kept: Vec<String> =
            self.words.iter().filter(|w| keep.contains(*w)).cloned().collect();
        let dropped: Vec<String> =
            self.words.iter().filter(|w| !keep.contains(*w)).cloned().collect();
        if kept.is_empty() {
            return Err(Error::TooFewWords { required: 1, actual: 0 });
        }
        let remap: BTreeMap<usize, usize> = self
            .words
            .iter()
            .enumerate()
            .filter(|(_, w)| keep.contains(*w))
            .enumerate()
            .map(|(new, (old, _))| (old, new))
            .collect();
        let mut pairs = Vec::new();
        let mut values = Vec::new();
        for (pos, (i, j)) in self.similarities.pairs().iter().enumerate() {
            if let (Some(&ni), Some(&nj)) = (remap.get(&i), remap.get(&j)) {
                pairs.push((ni.min(nj), ni.max(nj)));
                values.push(self.similarities.values()[pos]);
            }
        }
        let similarities = SimilarityStructure::new(
            PairIndex::from_pairs(pairs)?,
            values,
            SimilaritySource::Human,
        )?;
        Ok((Self { words: kept, similarities }, dropped))
    }
}

/// Reads pairwise human ratings from delimited text.
///
/// Each row is `word_a, word_b, mean_rating`. The delimiter (comma, tab,
/// semicolon, or whitespace) is sniffed from the first data line and a
/// header row is detected by a non-numeric third field. Words are
/// lowercased; self-pairs are skipped with a warning; repeated pairs are
/// averaged with a warning. The resulting vocabulary is sorted and unique.
pub fn read_ratings<R: Real, P: AsRef<Path>>(path: P) -> Result<HumanRatings<R>> {
    let reader = BufReader::new(File::open(path.as_ref())?);
    let mut delimiter: Option<Option<char>> = None;
    let mut header_checked = false;
    let mut accum: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
    let mut self_pairs = 0usize;
    let mut repeats = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let delim = *delimiter.get_or_insert_with(|| {
            ['\t', ',', ';'].into_iter().find(|&d| line.contains(d))
        });
        let fields: Vec<&str> = match delim {
            Some(d) => line.split(d).map(str::trim).collect(),
            None => line.split_whitespace().collect(),
        };
        if fields.len() != 3 {
            return Err(Error::InvalidInput(format!(
                "line {}: expected 3 fields (word_a, word_b, rating), got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let rating: f64 = match fields[2].parse() {
            Ok(v) => v,
            Err(_) if !header_checked => {
                // First unparsable row is taken as a header.
                header_checked = true;
                continue;
            }
            Err(_) => {
                return Err(Error::InvalidInput(format!(
                    "line {}: cannot parse rating '{}'",
                    lineno + 1,
                    fields[2]
                )));
            }
        };
        header_checked = true;
        if !rating.is_finite() {
            return Err(Error::InvalidInput(format!("line {}: non-finite rating", lineno + 1)));
        }
        let a = fields[0].to_lowercase();
        let b = fields[1].to_lowercase();
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidInput(format!("line {}: empty word field", lineno + 1)));
        }
        if a == b {
            self_pairs += 1;
            continue;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        let entry = accum.entry(key).or_insert((0.0, 0));
        if entry.1 > 0 {
            repeats += 1;
        }
        entry.0 += rating;
        entry.1 += 1;
    }
    if self_pairs > 0 {
        log::warn!("skipped {self_pairs} self-pair rating row(s)");
    }
    if repeats > 0 {
        log::warn!("averaged {repeats} repeated rating row(s)");
    }
    if accum.is_empty() {
        return Err(Error::InvalidInput("no usable rating rows".into()));
    }
    let words: Vec<String> = accum
        .keys()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> =
        words.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let mut pairs = Vec::with_capacity(accum.len());
    let mut values = Vec::with_capacity(accum.len());
    for ((a, b), (sum, count)) in &accum {
        pairs.push((index[a.as_str()], index[b.as_str()]));
        values.push(R::of(sum / *count as f64));
    }
    let similarities = SimilarityStructure::new(
        PairIndex::from_pairs(pairs)?,
        values,
        SimilaritySource::Human,
    )?;
    Ok(HumanRatings { words, similarities })
}
