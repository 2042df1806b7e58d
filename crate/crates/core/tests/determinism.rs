//! Thread-count invariance: every parallel stage reduces in a fixed order,
//! so results are bitwise identical whatever the pool size.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semprune::embedding::EmbeddingMatrix;
use semprune::interpret::{interpret_category, pca_first_pc, InterpretFilters};
use semprune::probe::{loocv_probe, SemanticNorms};
use semprune::pruner::{cross_validate, prune, FeatureSet};
use semprune::rsm::{PairIndex, SimilaritySource, SimilarityStructure};

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

#[test]
fn prune_and_cross_validate_are_pool_size_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 8;
    let f = 12;
    let data = Array2::from_shape_fn((n, f), |_| rng.random_range(-1.0..1.0));
    let words = (0..n).map(|i| format!("w{i}")).collect();
    let embedding = EmbeddingMatrix::new(words, data).unwrap();
    let pairs = PairIndex::complete(n);
    let values: Vec<f64> = (0..pairs.len()).map(|_| rng.random_range(0.0..7.0)).collect();
    let human = SimilarityStructure::new(pairs.clone(), values, SimilaritySource::Human).unwrap();

    let single = pool(1).install(|| {
        (
            prune(&embedding, &human, &pairs).unwrap(),
            cross_validate(&embedding, &human).unwrap(),
        )
    });
    let eight = pool(8).install(|| {
        (
            prune(&embedding, &human, &pairs).unwrap(),
            cross_validate(&embedding, &human).unwrap(),
        )
    });
    assert_eq!(single, eight);
}

#[test]
fn probe_and_interpret_are_pool_size_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 12;
    let k = 5;
    let data = Array2::from_shape_fn((n, k), |_| rng.random_range(-1.0..1.0));
    let words: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let embedding = EmbeddingMatrix::new(words.clone(), data).unwrap();
    let norms = SemanticNorms {
        words: words.clone(),
        dims: (0..6).map(|d| format!("d{d}")).collect(),
        values: Array2::from_shape_fn((n, 6), |_| rng.random_range(0.0..6.0)),
        dim_areas: vec!["a".into(), "a".into(), "a".into(), "b".into(), "b".into(), "b".into()],
        area_order: vec!["a".into(), "b".into()],
    };
    let features = FeatureSet::full(k);

    let mut text = String::new();
    for i in 0..n {
        for j in 0..n {
            if (i * 31 + j * 17) % 3 == 0 {
                text.push_str(&format!("w{i} w{j} filler{}\n", (i + j) % 4));
            }
        }
    }
    let stats = semprune::cooccur::count_text(&text, 2).unwrap();
    let category: Vec<String> = (0..6).map(|i| format!("w{i}")).collect();
    let cat_embedding = embedding.select_words(&category).unwrap();

    let run = |threads: usize| {
        pool(threads).install(|| {
            let report = loocv_probe(&embedding, &features, &norms, 3, "cat").unwrap();
            let pc1 = pca_first_pc(&cat_embedding, &features).unwrap();
            let hits =
                interpret_category(&stats, &pc1, &category, &InterpretFilters::default()).unwrap();
            (report, pc1, hits)
        })
    };
    assert_eq!(run(1), run(8));
}
