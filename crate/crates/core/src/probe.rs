//! Probing pruned feature sets against human-rated semantic norms.
//!
//! A partial-least-squares regression maps the retained embedding features
//! onto a battery of rated semantic dimensions. [`loocv_probe`] scores a
//! feature set by leave-one-word-out cross validation: each word's
//! dimension values are predicted by a model fit on all other words, then
//! every dimension is scored by the rank correlation between predictions
//! and ratings across words, and dimension scores are averaged within
//! their semantic areas. [`probe_all`] assembles one report per category
//! into a category-by-area matrix.

use std::collections::HashMap;
use std::path::Path;

use log::warn;
use ndarray::{Array1, Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::pruner::{FeatureSet, PruneSolution};
use crate::stats::spearman_rho;

/// Human ratings of words on named semantic dimensions, each dimension
/// assigned to one broader semantic area.
///
/// `dim_areas` is parallel to `dims`; `area_order` lists the distinct area
/// labels in first-appearance order over `dims`, which fixes the column
/// order of every downstream per-area artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticNorms<R> {
    pub words: Vec<String>,
    pub dims: Vec<String>,
    /// words x dims rating matrix; no missing entries.
    pub values: Array2<R>,
    pub dim_areas: Vec<String>,
    pub area_order: Vec<String>,
}

impl<R: Real> SemanticNorms<R> {
    pub fn n_words(&self) -> usize {
        self.words.len()
    }

    pub fn n_dims(&self) -> usize {
        self.dims.len()
    }
}

fn sniff_delimiter(first_line: &str) -> u8 {
    if first_line.contains('\t') {
        b'\t'
    } else if first_line.contains(';') {
        b';'
    } else {
        b','
    }
}

/// Loads the ratings table (header row: word label then dimension names)
/// and the two-column dimension-to-area mapping.
///
/// Words are lowercased; a repeated word keeps its first row (warned).
/// Every dimension must be mapped to exactly one area and every mapping
/// row must name a known dimension.
pub fn read_norms<R: Real>(ratings_path: &Path, areas_path: &Path) -> Result<SemanticNorms<R>> {
    let raw = std::fs::read_to_string(ratings_path)?;
    let delim = sniff_delimiter(raw.lines().next().unwrap_or(""));
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delim)
        .trim(csv::Trim::All)
        .from_reader(raw.as_bytes());

    let headers = reader.headers().map_err(|e| Error::InvalidInput(e.to_string()))?;
    if headers.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "ratings file {} needs a word column plus at least one dimension",
            ratings_path.display()
        )));
    }
    let dims: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();

    let mut words: Vec<String> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut rows: Vec<Vec<R>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidInput(e.to_string()))?;
        let line = i + 2;
        if record.len() != dims.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "ratings line {line}: expected {} fields, got {}",
                dims.len() + 1,
                record.len()
            )));
        }
        let word = record[0].to_lowercase();
        if word.is_empty() {
            return Err(Error::InvalidInput(format!("ratings line {line}: empty word")));
        }
        let mut row = Vec::with_capacity(dims.len());
        for field in record.iter().skip(1) {
            let v: f64 = field.parse().map_err(|_| {
                Error::InvalidInput(format!("ratings line {line}: unparsable value {field:?}"))
            })?;
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "ratings line {line}: non-finite value {field:?}"
                )));
            }
            row.push(R::of(v));
        }
        if seen.contains_key(&word) {
            warn!("ratings: duplicate word {word:?} at line {line}; keeping the first row");
            continue;
        }
        seen.insert(word.clone(), words.len());
        words.push(word);
        rows.push(row);
    }
    if words.is_empty() {
        return Err(Error::InvalidInput(format!(
            "ratings file {} has no data rows",
            ratings_path.display()
        )));
    }

    let raw_areas = std::fs::read_to_string(areas_path)?;
    let area_delim = sniff_delimiter(raw_areas.lines().next().unwrap_or(""));
    let mut area_reader = csv::ReaderBuilder::new()
        .delimiter(area_delim)
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(raw_areas.as_bytes());
    let mut mapping: HashMap<String, String> = HashMap::new();
    for (i, record) in area_reader.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidInput(e.to_string()))?;
        if i == 0 && !record.is_empty() && record[0].eq_ignore_ascii_case("dimension") {
            continue; // optional header row
        }
        if record.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "area mapping line {}: expected 2 fields, got {}",
                i + 1,
                record.len()
            )));
        }
        let dim = record[0].to_string();
        let area = record[1].to_string();
        if !dims.contains(&dim) {
            return Err(Error::InvalidInput(format!(
                "area mapping names unknown dimension {dim:?}"
            )));
        }
        if mapping.insert(dim.clone(), area).is_some() {
            return Err(Error::InvalidInput(format!(
                "dimension {dim:?} assigned to more than one area"
            )));
        }
    }
    let mut dim_areas = Vec::with_capacity(dims.len());
    for dim in &dims {
        match mapping.get(dim) {
            Some(area) => dim_areas.push(area.clone()),
            None => {
                return Err(Error::InvalidInput(format!(
                    "dimension {dim:?} has no area assignment"
                )))
            }
        }
    }
    let mut area_order: Vec<String> = Vec::new();
    for area in &dim_areas {
        if !area_order.contains(area) {
            area_order.push(area.clone());
        }
    }

    let n = words.len();
    let k = dims.len();
    let mut values = Array2::zeros((n, k));
    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            values[[r, c]] = v;
        }
    }
    Ok(SemanticNorms { words, dims, values, dim_areas, area_order })
}

/// A fitted partial-least-squares regression.
///
/// Predictors are mean-centered and unit-variance scaled (sample std;
/// constant columns keep scale 1), responses mean-centered only.
/// `coefficients` lives in the scaled predictor space; [`PlsrModel::predict`]
/// applies the stored transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct PlsrModel<R> {
    pub n_components: usize,
    pub x_mean: Vec<R>,
    pub x_scale: Vec<R>,
    pub y_mean: Vec<R>,
    /// predictor weights, p x c.
    pub weights: Array2<R>,
    /// predictor loadings, p x c.
    pub x_loadings: Array2<R>,
    /// response loadings, q x c.
    pub y_loadings: Array2<R>,
    /// regression coefficients in scaled predictor space, p x q.
    pub coefficients: Array2<R>,
}

const COLLAPSE_TOL: f64 = 1e-12;

/// Fits PLSR by NIPALS-style deflation.
///
/// The dominant singular pair of the predictor-response cross-product is
/// extracted per component (power iteration, tolerance 1e-12, deterministic
/// start, largest-|weight| sign rule); scores deflate the data and the
/// cross-product via its rank-one update. Requires
/// `1 <= n_components <= min(predictors, rows - 1)`. A collapsed latent
/// direction yields [`Error::RankDeficient`] carrying the component count
/// actually achieved, so callers can refit with fewer components.
pub fn plsr_fit<R: Real>(
    x: ArrayView2<R>,
    y: ArrayView2<R>,
    n_components: usize,
) -> Result<PlsrModel<R>> {
    let n = x.nrows();
    let p = x.ncols();
    let q = y.ncols();
    if y.nrows() != n {
        return Err(Error::LengthMismatch { left: n, right: y.nrows() });
    }
    if n < 2 {
        return Err(Error::InsufficientSamples { required: 2, actual: n });
    }
    if p == 0 || q == 0 {
        return Err(Error::InvalidInput("empty predictor or response matrix".into()));
    }
    let max_components = p.min(n - 1);
    if n_components == 0 || n_components > max_components {
        return Err(Error::InvalidInput(format!(
            "n_components {n_components} outside 1..={max_components} for {p} predictors and {n} rows"
        )));
    }

    let nr = R::of_usize(n);
    let mut x_mean = vec![R::zero(); p];
    let mut x_scale = vec![R::zero(); p];
    for c in 0..p {
        let mut s = R::zero();
        for r in 0..n {
            s += x[[r, c]];
        }
        let mean = s / nr;
        let mut ss = R::zero();
        for r in 0..n {
            let d = x[[r, c]] - mean;
            ss += d * d;
        }
        let var = ss / R::of_usize(n - 1);
        let sd = var.sqrt();
        x_mean[c] = mean;
        x_scale[c] = if sd.is_zero() { R::one() } else { sd };
    }
    let mut y_mean = vec![R::zero(); q];
    for c in 0..q {
        let mut s = R::zero();
        for r in 0..n {
            s += y[[r, c]];
        }
        y_mean[c] = s / nr;
    }

    let mut xc = Array2::zeros((n, p));
    for r in 0..n {
        for c in 0..p {
            xc[[r, c]] = (x[[r, c]] - x_mean[c]) / x_scale[c];
        }
    }
    let mut yc = Array2::zeros((n, q));
    for r in 0..n {
        for c in 0..q {
            yc[[r, c]] = y[[r, c]] - y_mean[c];
        }
    }

    // Cross-product, maintained by rank-one downdates instead of being
    // recomputed from the deflated data each component.
    let mut m: Array2<R> = xc.t().dot(&yc);
    let collapse = R::of(COLLAPSE_TOL);

    let mut weights = Array2::zeros((p, n_components));
    let mut x_loadings = Array2::zeros((p, n_components));
    let mut y_loadings = Array2::zeros((q, n_components));

    for comp in 0..n_components {
        let w = match dominant_left_singular(&m, collapse) {
            Some(w) => w,
            None => {
                return Err(Error::RankDeficient { requested: n_components, achieved: comp })
            }
        };
        let t = xc.dot(&w);
        let tt = t.dot(&t);
        if tt < collapse {
            return Err(Error::RankDeficient { requested: n_components, achieved: comp });
        }
        let p_load = xc.t().dot(&t).mapv(|v| v / tt);
        let q_load = yc.t().dot(&t).mapv(|v| v / tt);

        for r in 0..n {
            for c in 0..p {
                xc[[r, c]] -= t[r] * p_load[c];
            }
            for c in 0..q {
                yc[[r, c]] -= t[r] * q_load[c];
            }
        }
        for a in 0..p {
            for b in 0..q {
                m[[a, b]] -= tt * p_load[a] * q_load[b];
            }
        }
        for a in 0..p {
            weights[[a, comp]] = w[a];
            x_loadings[[a, comp]] = p_load[a];
        }
        for b in 0..q {
            y_loadings[[b, comp]] = q_load[b];
        }
    }

    // B = W (P^T W)^-1 Q^T, solved as (P^T W)^T Z = W^T.
    let a = x_loadings.t().dot(&weights);
    let mut at = Array2::zeros((n_components, n_components));
    for i in 0..n_components {
        for j in 0..n_components {
            at[[i, j]] = a[[j, i]];
        }
    }
    let mut rhs = Array2::zeros((n_components, p));
    for i in 0..n_components {
        for j in 0..p {
            rhs[[i, j]] = weights[[j, i]];
        }
    }
    solve_square(&mut at, &mut rhs)?;
    // rhs now holds Rw^T (c x p); B = Rw Q^T.
    let mut coefficients = Array2::zeros((p, q));
    for i in 0..p {
        for j in 0..q {
            let mut s = R::zero();
            for c in 0..n_components {
                s += rhs[[c, i]] * y_loadings[[j, c]];
            }
            coefficients[[i, j]] = s;
        }
    }

    Ok(PlsrModel {
        n_components,
        x_mean,
        x_scale,
        y_mean,
        weights,
        x_loadings,
        y_loadings,
        coefficients,
    })
}

/// Dominant left singular vector of `m` by alternating power iteration,
/// started from the largest-norm column, sign-fixed so the
/// largest-magnitude weight is positive. `None` if `m` has collapsed.
fn dominant_left_singular<R: Real>(m: &Array2<R>, collapse: R) -> Option<Array1<R>> {
    let (p, q) = m.dim();
    let mut start = 0;
    let mut best = R::zero();
    for c in 0..q {
        let mut s = R::zero();
        for r in 0..p {
            s += m[[r, c]] * m[[r, c]];
        }
        if s > best {
            best = s;
            start = c;
        }
    }
    if best.sqrt() < collapse {
        return None;
    }
    let mut w = m.column(start).to_owned();
    let norm = w.dot(&w).sqrt();
    w.mapv_inplace(|v| v / norm);
    for _ in 0..100 {
        let mut v = m.t().dot(&w);
        let vn = v.dot(&v).sqrt();
        if vn < collapse {
            return None;
        }
        v.mapv_inplace(|x| x / vn);
        let mut next = m.dot(&v);
        let nn = next.dot(&next).sqrt();
        if nn < collapse {
            return None;
        }
        next.mapv_inplace(|x| x / nn);
        let mut delta = R::zero();
        for i in 0..p {
            delta = delta.max((next[i] - w[i]).abs());
        }
        w = next;
        if delta <= R::of(1e-12) {
            break;
        }
    }
    let mut arg = 0;
    for i in 1..p {
        if w[i].abs() > w[arg].abs() {
            arg = i;
        }
    }
    if w[arg] < R::zero() {
        w.mapv_inplace(|v| -v);
    }
    Some(w)
}

/// Gaussian elimination with partial pivoting; `b` is overwritten with the
/// solution of `a x = b`.
fn solve_square<R: Real>(a: &mut Array2<R>, b: &mut Array2<R>) -> Result<()> {
    let n = a.nrows();
    let rhs = b.ncols();
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if a[[r, col]].abs() > a[[pivot, col]].abs() {
                pivot = r;
            }
        }
        if a[[pivot, col]].abs() < R::of(COLLAPSE_TOL) {
            return Err(Error::DegenerateData("singular PLS normal equations".into()));
        }
        if pivot != col {
            for c in 0..n {
                let tmp = a[[col, c]];
                a[[col, c]] = a[[pivot, c]];
                a[[pivot, c]] = tmp;
            }
            for c in 0..rhs {
                let tmp = b[[col, c]];
                b[[col, c]] = b[[pivot, c]];
                b[[pivot, c]] = tmp;
            }
        }
        for r in col + 1..n {
            let f = a[[r, col]] / a[[col, col]];
            if f.is_zero() {
                continue;
            }
            for c in col..n {
                let v = a[[col, c]];
                a[[r, c]] -= f * v;
            }
            for c in 0..rhs {
                let v = b[[col, c]];
                b[[r, c]] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        for c in 0..rhs {
            let mut s = b[[col, c]];
            for k in col + 1..n {
                s -= a[[col, k]] * b[[k, c]];
            }
            b[[col, c]] = s / a[[col, col]];
        }
    }
    Ok(())
}

impl<R: Real> PlsrModel<R> {
    /// Predicts the response vector for one predictor row.
    pub fn predict(&self, x: &[R]) -> Result<Vec<R>> {
        let p = self.x_mean.len();
        if x.len() != p {
            return Err(Error::LengthMismatch { left: x.len(), right: p });
        }
        let mut out = self.y_mean.clone();
        for (i, &xi) in x.iter().enumerate() {
            let z = (xi - self.x_mean[i]) / self.x_scale[i];
            for (j, o) in out.iter_mut().enumerate() {
                *o += z * self.coefficients[[i, j]];
            }
        }
        Ok(out)
    }
}

/// The first `k` features of a solution's ranking order.
pub fn top_k_features<R>(solution: &PruneSolution<R>, k: usize) -> Result<FeatureSet> {
    let available = solution.ranking.order.len();
    if k == 0 || k > available {
        return Err(Error::KTooLarge { k, available });
    }
    Ok(FeatureSet::new(solution.ranking.order[..k].iter().copied()))
}

/// Leave-one-word-out probe of `features` against the rated dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport<R> {
    pub category: String,
    pub n_features_used: usize,
    /// Components requested; individual folds may back off when the
    /// training data is rank deficient.
    pub n_components: usize,
    /// Norm words found in the embedding, in norms order.
    pub words_used: Vec<String>,
    /// Norm words absent from the embedding, dropped before fitting.
    pub dropped_words: Vec<String>,
    pub dims: Vec<String>,
    pub per_dimension_rho: Vec<R>,
    pub areas: Vec<String>,
    pub per_area_rho: Vec<R>,
    /// Cross-validated predictions, one row per used word.
    pub predictions: Vec<Vec<R>>,
}

/// Scores a feature set by leave-one-word-out cross validation.
///
/// Norm words missing from the embedding are dropped with a warning and
/// listed in the report. For each remaining word a model is fit on all
/// other words and predicts its dimension values; each dimension is then
/// scored by Spearman's rho between predictions and ratings across words,
/// and area scores are the exact means of their member dimensions. A fold
/// whose training data cannot support the requested component count backs
/// off to the achieved count.
pub fn loocv_probe<R: Real>(
    embedding: &EmbeddingMatrix<R>,
    features: &FeatureSet,
    norms: &SemanticNorms<R>,
    n_components: usize,
    category: &str,
) -> Result<ProbeReport<R>> {
    let cols = features.indices();
    if cols.is_empty() {
        return Err(Error::EmptySet);
    }
    if let Some(&max) = cols.last() {
        if max >= embedding.n_features() {
            return Err(Error::InvalidInput(format!(
                "feature index {max} out of range for {} features",
                embedding.n_features()
            )));
        }
    }
    let mut words_used = Vec::new();
    let mut dropped_words = Vec::new();
    let mut rows = Vec::new();
    for (i, word) in norms.words.iter().enumerate() {
        match embedding.index_of(word) {
            Some(r) => {
                words_used.push(word.clone());
                rows.push((r, i));
            }
            None => dropped_words.push(word.clone()),
        }
    }
    if !dropped_words.is_empty() {
        warn!(
            "probe: dropped {} of {} norm words missing from the embedding",
            dropped_words.len(),
            norms.words.len()
        );
    }
    let n = rows.len();
    if n < 3 {
        return Err(Error::TooFewWords { required: 3, actual: n });
    }
    let k = cols.len();
    let q = norms.n_dims();
    let max_components = k.min(n - 2);
    if n_components == 0 || n_components > max_components {
        return Err(Error::InvalidInput(format!(
            "n_components {n_components} outside 1..={max_components} for {k} features and {n} words under leave-one-out"
        )));
    }

    let mut x = Array2::zeros((n, k));
    let mut y = Array2::zeros((n, q));
    for (out_r, &(emb_r, norm_r)) in rows.iter().enumerate() {
        let row = embedding.row(emb_r);
        for (c, &col) in cols.iter().enumerate() {
            x[[out_r, c]] = row[col];
        }
        for d in 0..q {
            y[[out_r, d]] = norms.values[[norm_r, d]];
        }
    }

    let predictions: Vec<Vec<R>> = (0..n)
        .into_par_iter()
        .map(|held| -> Result<Vec<R>> {
            let mut xt = Array2::zeros((n - 1, k));
            let mut yt = Array2::zeros((n - 1, q));
            let mut out = 0;
            for r in 0..n {
                if r == held {
                    continue;
                }
                for c in 0..k {
                    xt[[out, c]] = x[[r, c]];
                }
                for d in 0..q {
                    yt[[out, d]] = y[[r, d]];
                }
                out += 1;
            }
            let mut ncomp = n_components;
            let model = loop {
                match plsr_fit(xt.view(), yt.view(), ncomp) {
                    Ok(m) => break m,
                    Err(Error::RankDeficient { achieved, .. }) if achieved >= 1 => {
                        warn!(
                            "probe fold {held}: rank deficient, backing off to {achieved} components"
                        );
                        ncomp = achieved;
                    }
                    Err(e) => return Err(e),
                }
            };
            let row: Vec<R> = (0..k).map(|c| x[[held, c]]).collect();
            model.predict(&row)
        })
        .collect::<Result<_>>()?;

    let mut per_dimension_rho = Vec::with_capacity(q);
    for d in 0..q {
        let pred: Vec<R> = predictions.iter().map(|row| row[d]).collect();
        let truth: Vec<R> = (0..n).map(|r| y[[r, d]]).collect();
        per_dimension_rho.push(spearman_rho(&pred, &truth)?);
    }
    let per_area_rho = area_means(&norms.area_order, &norms.dim_areas, &per_dimension_rho);

    Ok(ProbeReport {
        category: category.to_string(),
        n_features_used: k,
        n_components,
        words_used,
        dropped_words,
        dims: norms.dims.clone(),
        per_dimension_rho,
        areas: norms.area_order.clone(),
        per_area_rho,
        predictions,
    })
}

/// Arithmetic mean of member-dimension scores per area, in area order.
fn area_means<R: Real>(area_order: &[String], dim_areas: &[String], rho: &[R]) -> Vec<R> {
    area_order
        .iter()
        .map(|area| {
            let mut sum = R::zero();
            let mut count = 0usize;
            for (d, dim_area) in dim_areas.iter().enumerate() {
                if dim_area == area {
                    sum += rho[d];
                    count += 1;
                }
            }
            sum / R::of_usize(count)
        })
        .collect()
}

/// Per-area probe scores for several categories: one row per category (in
/// input order), one column per area (in norms area order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeMatrix<R> {
    pub categories: Vec<String>,
    pub areas: Vec<String>,
    pub rows: Vec<Vec<R>>,
    pub reports: Vec<ProbeReport<R>>,
}

/// Probes each category's top-`k` ranked features; every report uses the
/// same `k` and component count so rows are comparable.
pub fn probe_all<R: Real>(
    categories: &[(String, PruneSolution<R>)],
    embedding: &EmbeddingMatrix<R>,
    norms: &SemanticNorms<R>,
    k: usize,
    n_components: usize,
) -> Result<ProbeMatrix<R>> {
    if categories.is_empty() {
        return Err(Error::EmptySet);
    }
    for (name, solution) in categories {
        if solution.ranking.order.len() != embedding.n_features() {
            return Err(Error::InvalidInput(format!(
                "solution for {name:?} ranks {} features but the embedding has {}",
                solution.ranking.order.len(),
                embedding.n_features()
            )));
        }
    }
    let reports: Vec<ProbeReport<R>> = categories
        .iter()
        .map(|(name, solution)| {
            let features = top_k_features(solution, k)?;
            loocv_probe(embedding, &features, norms, n_components, name)
        })
        .collect::<Result<_>>()?;
    Ok(ProbeMatrix {
        categories: categories.iter().map(|(name, _)| name.clone()).collect(),
        areas: norms.area_order.clone(),
        rows: reports.iter().map(|r| r.per_area_rho.clone()).collect(),
        reports,
    })
}
