//! Windowed co-occurrence counting and PMI queries.
//!
//! Tokenization splits on any non-alphanumeric character and lowercases;
//! the fraction of occurrences that started with an uppercase letter is
//! recorded per token before lowercasing (it later drives the proper-noun
//! filter). Co-occurrence counts every unordered token-position pair within
//! `window` of each other once; line breaks block windows.
//!
//! PMI is `log2(P(w,i) / (P(w) * P(i)))` with `P(w,i) = pair_count /
//! total_pairs` and `P(w) = unigram_count / total_tokens`. Unseen pairs take
//! a 0 sentinel rather than negative infinity, so "nonzero PMI" coincides
//! with "nonzero joint probability".

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::sha256_hex_file;
use crate::num::Real;

const CACHE_HEADER: &str = "semprune-corpus-cache v1";

/// Streaming accumulator for co-occurrence counts.
///
/// Accumulators with the same window may be merged, so a corpus can be
/// sharded across workers at line granularity; the merged result is
/// identical to a single pass because all counts are additive.
#[derive(Debug, Clone)]
pub struct CorpusAccumulator {
    window: usize,
    // token -> (count, count of capitalized occurrences)
    unigrams: HashMap<String, (u64, u64)>,
    // (lexicographically smaller token, larger token) -> count
    pairs: HashMap<(String, String), u64>,
    total_tokens: u64,
}

impl CorpusAccumulator {
    pub fn new(window: usize) -> Result<Self> {
        if window < 1 {
            return Err(Error::InvalidInput("window must be at least 1".into()));
        }
        Ok(Self { window, unigrams: HashMap::new(), pairs: HashMap::new(), total_tokens: 0 })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Counts one line. Windows never span lines, so feeding a corpus line
    /// by line (in any grouping) is equivalent to feeding it whole.
    pub fn add_line(&mut self, line: &str) {
        let mut tokens: Vec<String> = Vec::new();
        for raw in line.split(|c: char| !c.is_alphanumeric()) {
            if raw.is_empty() {
                continue;
            }
            let capitalized = raw.chars().next().is_some_and(char::is_uppercase);
            let token = raw.to_lowercase();
            let entry = self.unigrams.entry(token.clone()).or_insert((0, 0));
            entry.0 += 1;
            if capitalized {
                entry.1 += 1;
            }
            tokens.push(token);
        }
        self.total_tokens += tokens.len() as u64;
        for i in 0..tokens.len() {
            for j in (i + 1)..tokens.len().min(i + self.window + 1) {
                let (a, b) = if tokens[i] <= tokens[j] {
                    (tokens[i].clone(), tokens[j].clone())
                } else {
                    (tokens[j].clone(), tokens[i].clone())
                };
                *self.pairs.entry((a, b)).or_insert(0) += 1;
            }
        }
    }

    /// Adds every count from `other` into `self`. Windows must match.
    pub fn merge(&mut self, other: CorpusAccumulator) -> Result<()> {
        if self.window != other.window {
            return Err(Error::InvalidInput(format!(
                "cannot merge window {} into window {}",
                other.window, self.window
            )));
        }
        for (token, (count, caps)) in other.unigrams {
            let entry = self.unigrams.entry(token).or_insert((0, 0));
            entry.0 += count;
            entry.1 += caps;
        }
        for (pair, count) in other.pairs {
            *self.pairs.entry(pair).or_insert(0) += count;
        }
        self.total_tokens += other.total_tokens;
        Ok(())
    }

    /// Freezes the accumulated counts into an indexed, queryable form.
    pub fn finalize(self) -> Result<CorpusStats> {
        if self.total_tokens == 0 {
            return Err(Error::EmptyCorpus);
        }
        let tokens: Vec<String> = {
            let set: BTreeSet<&String> = self.unigrams.keys().collect();
            set.into_iter().cloned().collect()
        };
        let index: HashMap<String, u32> =
            tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        let mut counts = vec![0u64; tokens.len()];
        let mut cap_counts = vec![0u64; tokens.len()];
        for (token, (count, caps)) in &self.unigrams {
            let id = index[token] as usize;
            counts[id] = *count;
            cap_counts[id] = *caps;
        }
        let mut pair_counts = BTreeMap::new();
        let mut total_pairs = 0u64;
        for ((a, b), count) in &self.pairs {
            let ia = index[a];
            let ib = index[b];
            pair_counts.insert((ia.min(ib), ia.max(ib)), *count);
            total_pairs += count;
        }
        CorpusStats::assemble(
            self.window,
            tokens,
            index,
            counts,
            cap_counts,
            pair_counts,
            self.total_tokens,
            total_pairs,
        )
    }
}

/// Frozen corpus statistics: unigram and unordered pair counts, frequency
/// ranks, and capitalization fractions, all keyed by a sorted vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    window: usize,
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    counts: Vec<u64>,
    cap_counts: Vec<u64>,
    pair_counts: BTreeMap<(u32, u32), u64>,
    total_tokens: u64,
    total_pairs: u64,
    // 1-based rank by descending count, ties by ascending token.
    freq_rank: Vec<u32>,
}

impl CorpusStats {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        window: usize,
        tokens: Vec<String>,
        index: HashMap<String, u32>,
        counts: Vec<u64>,
        cap_counts: Vec<u64>,
        pair_counts: BTreeMap<(u32, u32), u64>,
        total_tokens: u64,
        total_pairs: u64,
    ) -> Result<Self> {
        if counts.contains(&0) {
            return Err(Error::InvalidInput("zero unigram count in vocabulary".into()));
        }
        for (&(a, b), &c) in &pair_counts {
            if a > b || b as usize >= tokens.len() || c == 0 {
                return Err(Error::InvalidInput(format!("invalid pair entry ({a}, {b})")));
            }
        }
        let mut by_freq: Vec<u32> = (0..tokens.len() as u32).collect();
        by_freq.sort_unstable_by(|&a, &b| {
            counts[b as usize]
                .cmp(&counts[a as usize])
                .then_with(|| tokens[a as usize].cmp(&tokens[b as usize]))
        });
        let mut freq_rank = vec![0u32; tokens.len()];
        for (rank0, &id) in by_freq.iter().enumerate() {
            freq_rank[id as usize] = rank0 as u32 + 1;
        }
        Ok(Self {
            window,
            tokens,
            index,
            counts,
            cap_counts,
            pair_counts,
            total_tokens,
            total_pairs,
            freq_rank,
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Sorted vocabulary.
    pub fn vocab(&self) -> &[String] {
        &self.tokens
    }

    pub fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Total number of counted in-window position pairs.
    pub fn total_pairs(&self) -> u64 {
        self.total_pairs
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    fn id(&self, token: &str) -> Result<u32> {
        self.index
            .get(token)
            .copied()
            .ok_or_else(|| Error::UnknownWord(token.to_string()))
    }

    pub fn count(&self, token: &str) -> Result<u64> {
        Ok(self.counts[self.id(token)? as usize])
    }

    /// Co-occurrence count of an unordered token pair (0 when never seen).
    pub fn pair_count(&self, a: &str, b: &str) -> Result<u64> {
        let ia = self.id(a)?;
        let ib = self.id(b)?;
        Ok(self.pair_counts.get(&(ia.min(ib), ia.max(ib))).copied().unwrap_or(0))
    }

    /// 1-based frequency rank (descending count, ties by ascending token).
    pub fn frequency_rank(&self, token: &str) -> Result<u32> {
        Ok(self.freq_rank[self.id(token)? as usize])
    }

    /// Fraction of this token's raw occurrences that began with an
    /// uppercase letter.
    pub fn capitalized_fraction<R: Real>(&self, token: &str) -> Result<R> {
        let id = self.id(token)? as usize;
        Ok(R::of_u64(self.cap_counts[id]) / R::of_u64(self.counts[id]))
    }
}

/// Counts a corpus file with the given window.
pub fn count_corpus<P: AsRef<Path>>(path: P, window: usize) -> Result<CorpusStats> {
    let reader = BufReader::new(File::open(path.as_ref())?);
    let mut acc = CorpusAccumulator::new(window)?;
    for line in reader.lines() {
        acc.add_line(&line?);
    }
    acc.finalize()
}

/// Counts an in-memory text (used by tests and shard pipelines).
pub fn count_text(text: &str, window: usize) -> Result<CorpusStats> {
    let mut acc = CorpusAccumulator::new(window)?;
    for line in text.lines() {
        acc.add_line(line);
    }
    acc.finalize()
}

/// Pointwise mutual information of two vocabulary words, 0 when the pair
/// never co-occurs.
pub fn pmi<R: Real>(stats: &CorpusStats, w: &str, i: &str) -> Result<R> {
    let joint = stats.pair_count(w, i)?;
    if joint == 0 {
        return Ok(R::zero());
    }
    let p_joint = R::of_u64(joint) / R::of_u64(stats.total_pairs());
    let p_w = R::of_u64(stats.count(w)?) / R::of_u64(stats.total_tokens());
    let p_i = R::of_u64(stats.count(i)?) / R::of_u64(stats.total_tokens());
    Ok((p_joint / (p_w * p_i)).log2())
}

/// Immediate context `N(i)`: every vocabulary word with nonzero joint
/// probability with `i` (including `i` itself when it co-occurs with
/// another occurrence of itself).
pub fn immediate_context(stats: &CorpusStats, i: &str) -> Result<BTreeSet<String>> {
    let target = stats.id(i)?;
    let mut out = BTreeSet::new();
    for &(a, b) in stats.pair_counts.keys() {
        if a == target {
            out.insert(stats.tokens[b as usize].clone());
        } else if b == target {
            out.insert(stats.tokens[a as usize].clone());
        }
    }
    Ok(out)
}

/// Category context `C`: the union of immediate contexts of the category
/// words. Category words absent from the vocabulary are skipped with a
/// warning.
pub fn category_context(stats: &CorpusStats, category: &[String]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for word in category {
        match immediate_context(stats, word) {
            Ok(ctx) => out.extend(ctx),
            Err(Error::UnknownWord(w)) => {
                log::warn!("category word '{w}' not in corpus vocabulary; skipped");
            }
            Err(_) => unreachable!("immediate_context only fails on unknown words"),
        }
    }
    out
}

/// PMI of one target word against an ordered list of category words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmiVector<R> {
    pub target: String,
    pub contexts: Vec<String>,
    pub values: Vec<R>,
    pub nonzero_fraction: R,
}

/// Builds the PMI vector of `w` against `category` in the given order.
///
/// Category words absent from the vocabulary get the 0 sentinel (they have
/// zero joint probability with everything).
pub fn pmi_vector<R: Real>(
    stats: &CorpusStats,
    w: &str,
    category: &[String],
) -> Result<PmiVector<R>> {
    stats.id(w)?;
    let values: Vec<R> = category
        .iter()
        .map(|c| {
            if stats.contains(c) {
                pmi(stats, w, c)
            } else {
                Ok(R::zero())
            }
        })
        .collect::<Result<_>>()?;
    let nonzero = values.iter().filter(|v| !v.is_zero()).count();
    let nonzero_fraction = if values.is_empty() {
        R::zero()
    } else {
        R::of_usize(nonzero) / R::of_usize(values.len())
    };
    Ok(PmiVector { target: w.to_string(), contexts: category.to_vec(), values, nonzero_fraction })
}

/// Outcome of a cached corpus count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheOutcome {
    /// Cache file matched the corpus hash and window; counts loaded.
    Hit,
    /// Counts were (re)computed; the string says why.
    Rebuilt(String),
}

/// Counts a corpus with a persistent cache keyed by corpus content hash and
/// window size. A hit reproduces query results bit-exactly; a missing or
/// stale cache triggers a recount and rewrite with a logged warning.
pub fn count_corpus_cached<P: AsRef<Path>, Q: AsRef<Path>>(
    corpus: P,
    window: usize,
    cache: Q,
) -> Result<(CorpusStats, CacheOutcome)> {
    let corpus = corpus.as_ref();
    let cache = cache.as_ref();
    let hash = sha256_hex_file(corpus)?;
    let mut reason = "no cache".to_string();
    if cache.exists() {
        match read_cache(cache, &hash, window) {
            Ok(stats) => return Ok((stats, CacheOutcome::Hit)),
            Err(why) => {
                log::warn!("stale corpus cache {}: {why}; rebuilding", cache.display());
                reason = format!("stale cache: {why}");
            }
        }
    }
    let stats = count_corpus(corpus, window)?;
    write_cache(cache, &hash, &stats)?;
    Ok((stats, CacheOutcome::Rebuilt(reason)))
}

fn write_cache(path: &Path, corpus_hash: &str, stats: &CorpusStats) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{CACHE_HEADER}");
    let _ = writeln!(out, "hash {corpus_hash}");
    let _ = writeln!(out, "window {}", stats.window);
    let _ = writeln!(out, "total_tokens {}", stats.total_tokens);
    let _ = writeln!(out, "tokens {}", stats.tokens.len());
    for (i, token) in stats.tokens.iter().enumerate() {
        let _ = writeln!(out, "{token} {} {}", stats.counts[i], stats.cap_counts[i]);
    }
    let _ = writeln!(out, "pairs {}", stats.pair_counts.len());
    for (&(a, b), &c) in &stats.pair_counts {
        let _ = writeln!(out, "{a} {b} {c}");
    }
    let mut f = File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

fn read_cache(path: &Path, expect_hash: &str, expect_window: usize) -> std::result::Result<CorpusStats, String> {
    let file = File::open(path).map_err(|e| e.to_string())?;
    let mut lines = BufReader::new(file).lines();
    let mut next = || -> std::result::Result<String, String> {
        lines
            .next()
            .ok_or_else(|| "truncated cache".to_string())?
            .map_err(|e| e.to_string())
    };
    if next()? != CACHE_HEADER {
        return Err("unrecognized header".into());
    }
    let hash_line = next()?;
    let hash = hash_line.strip_prefix("hash ").ok_or("missing hash")?;
    if hash != expect_hash {
        return Err("corpus content changed".into());
    }
    let window: usize = field(&next()?, "window")?;
    if window != expect_window {
        return Err(format!("cache window {window} != requested {expect_window}"));
    }
    let total_tokens: u64 = field(&next()?, "total_tokens")?;
    let n_tokens: usize = field(&next()?, "tokens")?;
    let mut tokens = Vec::with_capacity(n_tokens);
    let mut counts = Vec::with_capacity(n_tokens);
    let mut cap_counts = Vec::with_capacity(n_tokens);
    for _ in 0..n_tokens {
        let line = next()?;
        let mut parts = line.split(' ');
        let token = parts.next().ok_or("bad token line")?.to_string();
        let count: u64 = parts.next().ok_or("bad token line")?.parse().map_err(|_| "bad count")?;
        let caps: u64 = parts.next().ok_or("bad token line")?.parse().map_err(|_| "bad count")?;
        if parts.next().is_some() {
            return Err("bad token line".into());
        }
        tokens.push(token);
        counts.push(count);
        cap_counts.push(caps);
    }
    let n_pairs: usize = field(&next()?, "pairs")?;
    let mut pair_counts = BTreeMap::new();
    let mut total_pairs = 0u64;
    for _ in 0..n_pairs {
        let line = next()?;
        let mut parts = line.split(' ');
        let a: u32 = parts.next().ok_or("bad pair line")?.parse().map_err(|_| "bad id")?;
        let b: u32 = parts.next().ok_or("bad pair line")?.parse().map_err(|_| "bad id")?;
        let c: u64 = parts.next().ok_or("bad pair line")?.parse().map_err(|_| "bad count")?;
        pair_counts.insert((a, b), c);
        total_pairs += c;
    }
    if tokens.windows(2).any(|w| w[0] >= w[1]) {
        return Err("vocabulary not sorted".into());
    }
    let index: HashMap<String, u32> =
        tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
    CorpusStats::assemble(
        window,
        tokens,
        index,
        counts,
        cap_counts,
        pair_counts,
        total_tokens,
        total_pairs,
    )
    .map_err(|e| e.to_string())
}

fn field<T: std::str::FromStr>(line: &str, key: &str) -> std::result::Result<T, String> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| format!("missing field {key}"))?
        .parse()
        .map_err(|_| format!("bad value for {key}"))
}
