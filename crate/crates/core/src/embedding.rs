//! Word-embedding storage and loading.
//!
//! An [`EmbeddingMatrix`] is an `N x F` matrix of word vectors with a word
//! index. Loaders accept whitespace-separated text (GloVe layout: word
//! followed by its vector components, one word per line) and can filter to a
//! vocabulary of interest while streaming, so large embedding files never
//! need to be fully materialized.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::num::Real;

/// Dense embedding matrix: one row per word, one column per feature.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix<R> {
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Array2<R>,
}

impl<R: Real> EmbeddingMatrix<R> {
    /// Builds a matrix from parallel word and row data.
    ///
    /// Words must be unique, values finite, and there must be at least one
    /// word and two features.
    pub fn new(words: Vec<String>, data: Array2<R>) -> Result<Self> {
        if words.len() != data.nrows() {
            return Err(Error::LengthMismatch { left: words.len(), right: data.nrows() });
        }
        if words.is_empty() {
            return Err(Error::TooFewWords { required: 1, actual: 0 });
        }
        if data.ncols() < 2 {
            return Err(Error::InvalidInput(format!(
                "embeddings need at least 2 features, got {}",
                data.ncols()
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate word: {w}")));
            }
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("embedding contains non-finite values".into()));
        }
        Ok(Self { words, index, data })
    }

    pub fn n_words(&self) -> usize {
        self.words.len()
    }

    pub fn n_features(&self) -> usize {
        self.data.ncols()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    /// Row index of `word`, if present.
    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, R> {
        self.data.row(i)
    }

    pub fn matrix(&self) -> &Array2<R> {
        &self.data
    }

    /// Extracts the rows for `order`, in that order. Any word absent from
    /// the matrix is reported by name.
    pub fn select_words(&self, order: &[String]) -> Result<Self> {
        let mut rows = Array2::zeros((order.len(), self.n_features()));
        for (out, w) in order.iter().enumerate() {
            let src = self
                .index_of(w)
                .ok_or_else(|| Error::UnknownWord(w.clone()))?;
            rows.row_mut(out).assign(&self.data.row(src));
        }
        Self::new(order.to_vec(), rows)
    }

    /// Loads a whole embedding file.
    pub fn read_text<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::read_impl(path.as_ref(), None)
    }

    /// Loads only rows whose word is in `keep`, preserving file order.
    pub fn read_text_filtered<P: AsRef<Path>>(path: P, keep: &BTreeSet<String>) -> Result<Self> {
        Self::read_impl(path.as_ref(), Some(keep))
    }

    fn read_impl(path: &Path, keep: Option<&BTreeSet<String>>) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut words: Vec<String> = Vec::new();
        let mut values: Vec<R> = Vec::new();
        let mut dim: Option<usize> = None;
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let word = fields
                .next()
                .expect("non-empty line has at least one field")
                .to_string();
            if let Some(keep) = keep {
                if !keep.contains(&word) {
                    continue;
                }
            }
            if !seen.insert(word.clone()) {
                log::warn!("duplicate embedding row for '{word}' at line {}; keeping the first", lineno + 1);
                continue;
            }
            let mut row = Vec::new();
            for field in fields {
                let v: f64 = field.parse().map_err(|_| {
                    Error::InvalidInput(format!(
                        "line {}: cannot parse '{}' as a number",
                        lineno + 1,
                        field
                    ))
                })?;
                row.push(R::of(v));
            }
            match dim {
                None => {
                    if row.len() < 2 {
                        return Err(Error::InvalidInput(format!(
                            "line {}: expected at least 2 vector components, got {}",
                            lineno + 1,
                            row.len()
                        )));
                    }
                    dim = Some(row.len());
                }
                Some(d) if d != row.len() => {
                    return Err(Error::InvalidInput(format!(
                        "line {}: expected {} vector components, got {}",
                        lineno + 1,
                        d,
                        row.len()
                    )));
                }
                _ => {}
            }
            words.push(word);
            values.extend(row);
        }
        let dim = dim.ok_or(Error::TooFewWords { required: 1, actual: 0 })?;
        let data = Array2::from_shape_vec((words.len(), dim), values)
            .expect("row-major buffer matches parsed shape");
        Self::new(words, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::io::Write;

    fn toy() -> EmbeddingMatrix<f64> {
        EmbeddingMatrix::new(
            vec!["chair".into(), "table".into(), "sofa".into()],
            array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]],
        )
        .unwrap()
    }

    #[test]
    fn builds_and_indexes() {
        let e = toy();
        assert_eq!(e.n_words(), 3);
        assert_eq!(e.n_features(), 3);
        assert_eq!(e.index_of("table"), Some(1));
        assert_eq!(e.index_of("desk"), None);
        assert_eq!(e.row(2).to_vec(), vec![7.0, 8.0, 9.0]);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(matches!(
            EmbeddingMatrix::new(vec!["a".into()], array![[1.0f64, 2.0], [3.0, 4.0]]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            EmbeddingMatrix::new(vec!["a".into(), "a".into()], array![[1.0f64, 2.0], [3.0, 4.0]]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            EmbeddingMatrix::new(vec!["a".into()], array![[1.0f64]]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            EmbeddingMatrix::new(vec!["a".into(), "b".into()], array![[1.0f64, f64::NAN], [3.0, 4.0]]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn select_words_reorders_and_reports_missing() {
        let e = toy();
        let sub = e.select_words(&["sofa".into(), "chair".into()]).unwrap();
        assert_eq!(sub.words(), &["sofa".to_string(), "chair".to_string()]);
        assert_eq!(sub.row(0).to_vec(), vec![7.0, 8.0, 9.0]);
        let err = e.select_words(&["sofa".into(), "desk".into()]).unwrap_err();
        match err {
            Error::UnknownWord(w) => assert_eq!(w, "desk"),
            other => panic!("expected UnknownWord, got {other:?}"),
        }
    }

    #[test]
    fn reads_glove_style_text() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "chair 0.1 0.2 0.3").unwrap();
        writeln!(f, "table -1.5 2.25 0.0").unwrap();
        writeln!(f).unwrap();
        writeln!(f, "sofa 4.0 5.0 6.0").unwrap();
        let e: EmbeddingMatrix<f64> = EmbeddingMatrix::read_text(f.path()).unwrap();
        assert_eq!(e.words(), &["chair".to_string(), "table".to_string(), "sofa".to_string()]);
        assert_eq!(e.row(1).to_vec(), vec![-1.5, 2.25, 0.0]);
    }

    #[test]
    fn filtered_read_keeps_requested_words_only() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for (w, v) in [("a", 1.0), ("b", 2.0), ("c", 3.0), ("d", 4.0)] {
            writeln!(f, "{w} {v} {}", v * 10.0).unwrap();
        }
        let keep: BTreeSet<String> = ["b".to_string(), "d".to_string()].into_iter().collect();
        let e: EmbeddingMatrix<f64> = EmbeddingMatrix::read_text_filtered(f.path(), &keep).unwrap();
        assert_eq!(e.words(), &["b".to_string(), "d".to_string()]);
        assert_eq!(e.row(1).to_vec(), vec![4.0, 40.0]);
    }

    #[test]
    fn read_rejects_ragged_rows() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a 1.0 2.0 3.0").unwrap();
        writeln!(f, "b 1.0 2.0").unwrap();
        let err = EmbeddingMatrix::<f64>::read_text(f.path()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(msg) if msg.contains("line 2")));
    }

    #[test]
    fn read_keeps_first_duplicate_row() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a 1.0 2.0").unwrap();
        writeln!(f, "a 9.0 9.0").unwrap();
        writeln!(f, "b 3.0 4.0").unwrap();
        let e: EmbeddingMatrix<f64> = EmbeddingMatrix::read_text(f.path()).unwrap();
        assert_eq!(e.n_words(), 2);
        assert_eq!(e.row(0).to_vec(), vec![1.0, 2.0]);
    }
}
