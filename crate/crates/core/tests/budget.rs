//! RSM construction budget of the pruning pipeline.
//!
//! Lives in its own test binary: the build counter is process-global, so
//! the deltas below are only meaningful when nothing else builds RSMs
//! concurrently.

use ndarray::Array2;
use semprune::embedding::EmbeddingMatrix;
use semprune::instrument::rsm_build_count;
use semprune::pruner::{prune, rank_features, reinsertion_curve};
use semprune::rsm::{PairIndex, SimilaritySource, SimilarityStructure};

fn instance(n: usize, f: usize) -> (EmbeddingMatrix<f64>, SimilarityStructure<f64>, PairIndex) {
    // Small LCG keeps the fixture self-contained and deterministic.
    let mut state = 0x2545f4914f6cdd1du64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 33) as f64) / (1u64 << 31) as f64 - 1.0
    };
    let data = Array2::from_shape_fn((n, f), |_| next());
    let words = (0..n).map(|i| format!("w{i}")).collect();
    let embedding = EmbeddingMatrix::new(words, data).unwrap();
    let pairs = PairIndex::complete(n);
    let values = (0..pairs.len()).map(|_| next()).collect();
    let human = SimilarityStructure::new(pairs.clone(), values, SimilaritySource::Human).unwrap();
    (embedding, human, pairs)
}

/// Ranking costs F+1 builds, the curve F-1 more (size-1 is never built),
/// so a full prune is exactly 2F.
#[test]
fn prune_uses_exactly_two_builds_per_feature() {
    let f = 11;
    let (embedding, human, pairs) = instance(7, f);

    let before = rsm_build_count();
    let ranking = rank_features(&embedding, &human, &pairs).unwrap();
    let after_ranking = rsm_build_count();
    assert_eq!(after_ranking - before, (f + 1) as u64);

    let _curve = reinsertion_curve(&embedding, &human, &pairs, &ranking).unwrap();
    let after_curve = rsm_build_count();
    assert_eq!(after_curve - after_ranking, (f - 1) as u64);

    let before_prune = rsm_build_count();
    let _solution = prune(&embedding, &human, &pairs).unwrap();
    assert_eq!(rsm_build_count() - before_prune, 2 * f as u64);
}
