//! Interpretable pruning of word embeddings against human similarity
//! judgments.
//!
//! The central object is a representational similarity matrix (RSM): the
//! word-pair similarity structure an embedding induces over a small word
//! category. [`pruner::prune`] searches for the feature subset whose RSM
//! best rank-correlates with human pairwise similarity ratings, by ranking
//! features on their leave-one-out fit drop and walking the reinsertion
//! curve. Around that sit:
//!
//! - [`rsm`]: RSM construction, second-order fit, and leave-one-word-out
//!   fold construction, plus the ratings loader;
//! - [`pruner`]: the ranking/reinsertion search, cross-validated
//!   generalization tests, and cross-category feature overlap;
//! - [`cooccur`]: windowed co-occurrence counting over a corpus and PMI,
//!   with a content-addressed on-disk cache;
//! - [`interpret`]: PCA over the retained features and the filtered search
//!   for context words whose PMI profile tracks the first component;
//! - [`probe`]: partial-least-squares prediction of rated semantic
//!   dimensions from retained features, under leave-one-word-out CV;
//! - [`stats`]: the rank-correlation and test-statistic kernel shared by
//!   all of the above.
//!
//! Everything is generic over the scalar type through [`num::Real`]
//! (`f32` or `f64`); the `*64` aliases at the crate root fix `f64`, which
//! is what the command-line pipeline uses. All operations are
//! deterministic for fixed inputs, independent of thread count.

pub mod cooccur;
pub mod error;
pub mod hash;
pub mod instrument;
pub mod interpret;
pub mod num;
pub mod probe;
pub mod pruner;
pub mod rsm;
pub mod stats;

pub mod embedding;

pub use embedding::EmbeddingMatrix;
pub use error::{Error, Result};
pub use num::Real;

pub type EmbeddingMatrix64 = embedding::EmbeddingMatrix<f64>;
pub type SimilarityStructure64 = rsm::SimilarityStructure<f64>;
pub type HumanRatings64 = rsm::HumanRatings<f64>;
pub type FeatureRanking64 = pruner::FeatureRanking<f64>;
pub type PruneSolution64 = pruner::PruneSolution<f64>;
pub type CrossValidation64 = pruner::CrossValidation<f64>;
pub type PmiVector64 = cooccur::PmiVector<f64>;
pub type Pc1Result64 = interpret::Pc1Result<f64>;
pub type InterpretFilters64 = interpret::InterpretFilters<f64>;
pub type Interpretation64 = interpret::Interpretation<f64>;
pub type InterpretationHit64 = interpret::InterpretationHit<f64>;
pub type SemanticNorms64 = probe::SemanticNorms<f64>;
pub type PlsrModel64 = probe::PlsrModel<f64>;
pub type ProbeReport64 = probe::ProbeReport<f64>;
pub type ProbeMatrix64 = probe::ProbeMatrix<f64>;
