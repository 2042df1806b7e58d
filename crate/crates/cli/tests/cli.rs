//! End-to-end tests of the `semprune` binary against the small fixture
//! pipeline under `tests/fixtures/`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use semprune::cooccur::count_corpus;
use semprune::interpret::{interpret_category, pca_first_pc};
use semprune::stats::dice;
use semprune::{EmbeddingMatrix64, InterpretFilters64, PruneSolution64};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

fn config_arg() -> String {
    fixtures().join("config.toml").to_string_lossy().into_owned()
}

fn semprune_cmd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semprune"))
}

fn run(args: &[&str]) -> Output {
    semprune_cmd().args(args).output().expect("binary runs")
}

/// Runs the binary expecting success; panics with the captured streams
/// otherwise.
fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed with {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
    out
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    serde_json::from_str(&text)
        .unwrap_or_else(|e| panic!("invalid JSON in {}: {e}", path.display()))
}

fn read_csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_path(path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    let header = reader.headers().unwrap().iter().map(|s| s.to_string()).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(|s| s.to_string()).collect())
        .collect();
    (header, rows)
}

/// Prunes the fixture categories into a fresh output directory.
fn prune_into(dir: &Path) {
    run_ok(&["--config", &config_arg(), "--output-dir", &dir.to_string_lossy(), "prune"]);
}

#[test]
fn prune_writes_parseable_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    prune_into(tmp.path());
    let dir = tmp.path().join("prune");

    let furniture = read_json(&dir.join("furniture.solution.json"));
    assert_eq!(furniture["category"], "furniture");
    assert_eq!(
        furniture["words"].as_array().unwrap().iter().map(|w| w.as_str().unwrap()).collect::<Vec<_>>(),
        ["chair", "desk", "lamp", "sofa", "table"]
    );
    assert_eq!(furniture["n_features"], 6);
    // chair-lamp is deliberately unrated in the fixture.
    assert_eq!(furniture["n_pairs_rated"], 9);
    assert_eq!(furniture["solution"]["curve"].as_array().unwrap().len(), 6);
    assert!(furniture["solution"]["selected"].as_array().unwrap().len() >= 2);
    assert_eq!(furniture["cross_validation"]["folds"].as_array().unwrap().len(), 5);

    let clothing = read_json(&dir.join("clothing.solution.json"));
    assert_eq!(
        clothing["words"].as_array().unwrap().iter().map(|w| w.as_str().unwrap()).collect::<Vec<_>>(),
        ["coat", "glove", "hat", "scarf", "shirt"]
    );
    // The repeated coat-glove row collapses into one averaged pair.
    assert_eq!(clothing["n_pairs_rated"], 10);

    let (header, rows) = read_csv_rows(&dir.join("summary.csv"));
    assert_eq!(header[0], "category");
    assert_eq!(header.len(), 15);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "furniture");
    assert_eq!(rows[1][0], "clothing");

    let (_, folds) = read_csv_rows(&dir.join("furniture.folds.csv"));
    assert_eq!(folds.len(), 5);
    assert_eq!(folds[0][0], "chair");

    let meta = read_json(&dir.join("meta.json"));
    assert_eq!(meta["command"], "prune");
    let inputs = meta["inputs"].as_array().unwrap();
    assert_eq!(inputs.len(), 3); // embedding + two rating files
    for input in inputs {
        assert_eq!(input["sha256"].as_str().unwrap().len(), 64);
        assert!(!input["file"].as_str().unwrap().contains('/'));
    }
}

#[test]
fn prune_reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    prune_into(a.path());
    prune_into(b.path());
    for name in ["furniture.solution.json", "clothing.solution.json", "summary.csv"] {
        let left = fs::read(a.path().join("prune").join(name)).unwrap();
        let right = fs::read(b.path().join("prune").join(name)).unwrap();
        assert_eq!(left, right, "{name} differs between identical runs");
    }
}

#[test]
fn missing_embedding_word_exits_2_naming_it() {
    let tmp = tempfile::tempdir().unwrap();
    let mut ratings = fs::read_to_string(fixtures().join("furniture.csv")).unwrap();
    ratings.push_str("unicorn,chair,5.0\nunicorn,desk,4.0\nunicorn,lamp,4.5\n");
    fs::write(tmp.path().join("ratings.csv"), ratings).unwrap();
    let config = format!(
        "embedding = {:?}\n[[category]]\nname = \"furniture\"\nratings = \"ratings.csv\"\n",
        fixtures().join("embedding.txt")
    );
    let config_path = tmp.path().join("config.toml");
    fs::write(&config_path, config).unwrap();

    let out_dir = tmp.path().join("out");
    let out = run(&[
        "--config",
        &config_path.to_string_lossy(),
        "--output-dir",
        &out_dir.to_string_lossy(),
        "prune",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("unicorn"), "stderr: {}", stderr_of(&out));
}

#[test]
fn overlap_single_input_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    prune_into(tmp.path());
    let solution = tmp.path().join("prune").join("furniture.solution.json");
    let out = run(&[
        "--config",
        &config_arg(),
        "--output-dir",
        &tmp.path().to_string_lossy(),
        "overlap",
        &solution.to_string_lossy(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("at least 2"), "stderr: {}", stderr_of(&out));
}

#[test]
fn overlap_matrix_matches_direct_dice() {
    let tmp = tempfile::tempdir().unwrap();
    prune_into(tmp.path());
    run_ok(&["--config", &config_arg(), "--output-dir", &tmp.path().to_string_lossy(), "overlap"]);

    let selected = |name: &str| -> BTreeSet<usize> {
        let v = read_json(&tmp.path().join("prune").join(format!("{name}.solution.json")));
        v["solution"]["selected"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap() as usize)
            .collect()
    };
    let sets = [selected("furniture"), selected("clothing")];

    let (header, rows) = read_csv_rows(&tmp.path().join("overlap").join("dice_matrix.csv"));
    assert_eq!(header, ["category", "furniture", "clothing"]);
    assert_eq!(rows.len(), 2);
    for (i, row) in rows.iter().enumerate() {
        for (j, set_j) in sets.iter().enumerate() {
            let got: f64 = row[j + 1].parse().unwrap();
            let want: f64 = dice(&sets[i], set_j).unwrap();
            assert_eq!(got, want, "dice[{i}][{j}]");
        }
    }
    assert_eq!(rows[0][1], "1", "diagonal must be exactly 1");
    assert_eq!(rows[0][2], rows[1][1], "matrix must be symmetric");

    let (_, counts) = read_csv_rows(&tmp.path().join("overlap").join("retention_counts.csv"));
    assert_eq!(counts.len(), 6);
    for (feature, row) in counts.iter().enumerate() {
        let want = sets.iter().filter(|s| s.contains(&feature)).count();
        assert_eq!(row[0], feature.to_string());
        assert_eq!(row[1], want.to_string());
    }
}

#[test]
fn interpret_hits_match_module_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    prune_into(tmp.path());
    run_ok(&[
        "--config",
        &config_arg(),
        "--output-dir",
        &tmp.path().to_string_lossy(),
        "interpret",
        "--category",
        "furniture",
    ]);
    let dir = tmp.path().join("interpret");

    // The fixture corpus pairs "wood" with the furniture words at rates
    // that track their shared latent ordering, so it is the one hit: the
    // proper noun, the digit token, and the flat-PMI word are filtered out.
    let (header, rows) = read_csv_rows(&dir.join("furniture.pruned.hits.csv"));
    assert_eq!(header, ["word", "rho", "p", "nonzero_fraction", "frequency_rank"]);
    assert_eq!(rows.len(), 1, "rows: {rows:?}");
    assert_eq!(rows[0][0], "wood");
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[0][4], "2");

    let report = read_json(&dir.join("furniture.report.json"));
    let counts = &report["filter_counts_pruned"];
    assert_eq!(counts["context_size"], 4);
    assert_eq!(counts["after_frequency"], 4);
    assert_eq!(counts["after_exclusions"], 2);
    assert_eq!(counts["after_nonzero"], 2);
    assert_eq!(counts["after_significance"], 1);
    assert_eq!(report["comparison"]["n_common"], 1);

    // Recompute the pruned hit list directly through the library.
    let solution = read_json(&tmp.path().join("prune").join("furniture.solution.json"));
    let words: Vec<String> = solution["words"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w.as_str().unwrap().to_string())
        .collect();
    let pruned: PruneSolution64 = serde_json::from_value(solution["solution"].clone()).unwrap();
    let embedding = EmbeddingMatrix64::read_text(fixtures().join("embedding.txt"))
        .unwrap()
        .select_words(&words)
        .unwrap();
    let stats = count_corpus(fixtures().join("corpus.txt"), 2).unwrap();
    let pc1 = pca_first_pc(&embedding, &pruned.selected).unwrap();
    let oracle = interpret_category(&stats, &pc1, &words, &InterpretFilters64::default()).unwrap();
    let oracle_words: Vec<&str> = oracle.hits.iter().map(|h| h.word.as_str()).collect();
    let csv_words: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(csv_words, oracle_words);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), oracle.hits[0].rho);
}

#[test]
fn interpret_empty_hits_still_writes_header() {
    let tmp = tempfile::tempdir().unwrap();
    prune_into(tmp.path());
    // Cutoff 1 keeps only the single most frequent token, which is not a
    // furniture context word, so every candidate fails the frequency stage.
    run_ok(&[
        "--config",
        &config_arg(),
        "--output-dir",
        &tmp.path().to_string_lossy(),
        "--frequency-cutoff",
        "1",
        "interpret",
        "--category",
        "furniture",
    ]);
    let csv = fs::read_to_string(
        tmp.path().join("interpret").join("furniture.pruned.hits.csv"),
    )
    .unwrap();
    assert_eq!(csv, "word,rho,p,nonzero_fraction,frequency_rank\n");
}

#[test]
fn stale_cache_is_rebuilt_with_warning() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus.txt");
    fs::copy(fixtures().join("corpus.txt"), &corpus).unwrap();
    let out_dir = tmp.path().join("out");
    let base: Vec<String> = vec![
        "--config".into(),
        config_arg(),
        "--corpus".into(),
        corpus.to_string_lossy().into_owned(),
        "--output-dir".into(),
        out_dir.to_string_lossy().into_owned(),
        "count-corpus".into(),
    ];
    let argv: Vec<&str> = base.iter().map(String::as_str).collect();

    let first = run_ok(&argv);
    assert!(stdout_of(&first).contains("cache rebuilt: no cache"), "{}", stdout_of(&first));

    let second = run_ok(&argv);
    assert!(stdout_of(&second).contains("cache hit"), "{}", stdout_of(&second));

    let mut text = fs::read_to_string(&corpus).unwrap();
    text.push_str("wood bench\n");
    fs::write(&corpus, text).unwrap();

    let third = run_ok(&argv);
    assert!(stdout_of(&third).contains("cache rebuilt: stale cache"), "{}", stdout_of(&third));
    assert!(stderr_of(&third).contains("stale corpus cache"), "{}", stderr_of(&third));
}

#[test]
fn probe_writes_matrix_and_reports() {
    let tmp = tempfile::tempdir().unwrap();
    prune_into(tmp.path());
    run_ok(&["--config", &config_arg(), "--output-dir", &tmp.path().to_string_lossy(), "probe"]);
    let dir = tmp.path().join("probe");

    let (header, rows) = read_csv_rows(&dir.join("matrix.csv"));
    assert_eq!(header, ["category", "Perception", "Motion", "Gustation", "Cognition"]);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "furniture");
    assert_eq!(rows[1][0], "clothing");

    let report = read_json(&dir.join("furniture.report.json"));
    assert_eq!(report["n_features_used"], 4);
    assert_eq!(report["n_components"], 2);
    assert_eq!(report["words_used"].as_array().unwrap().len(), 10);
    assert_eq!(report["dropped_words"].as_array().unwrap().iter().collect::<Vec<_>>().len(), 1);
    assert_eq!(report["dropped_words"][0], "zebra");

    // Area scores are exact means of their member dimension scores.
    let dim_rho: Vec<f64> = report["per_dimension_rho"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let area_rho: Vec<f64> = report["per_area_rho"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    // Dimension order: vision, audition, motion, taste, smell, cognition.
    assert_eq!(area_rho[0], (dim_rho[0] + dim_rho[1]) / 2.0);
    assert_eq!(area_rho[1], dim_rho[2]);
    assert_eq!(area_rho[2], (dim_rho[3] + dim_rho[4]) / 2.0);
    assert_eq!(area_rho[3], dim_rho[5]);

    let (_, dim_rows) = read_csv_rows(&dir.join("furniture.dimensions.csv"));
    assert_eq!(dim_rows.len(), 6);
    assert_eq!(dim_rows[0][0], "vision");
    assert_eq!(dim_rows[0][1], "Perception");

    // The matrix row must equal the per-area scores from the report.
    for (j, &rho) in area_rho.iter().enumerate() {
        assert_eq!(rows[0][j + 1].parse::<f64>().unwrap(), rho);
    }
}

#[test]
fn probe_k_exceeding_features_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    prune_into(tmp.path());
    let out = run(&[
        "--config",
        &config_arg(),
        "--output-dir",
        &tmp.path().to_string_lossy(),
        "--probe-k",
        "40",
        "probe",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(
        stderr_of(&out).contains("exceeds the number of available features"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn invalid_threshold_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "--config",
        &config_arg(),
        "--output-dir",
        &tmp.path().to_string_lossy(),
        "--significance",
        "1.5",
        "prune",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("significance"), "stderr: {}", stderr_of(&out));
}

#[test]
fn unknown_category_is_a_user_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "--config",
        &config_arg(),
        "--output-dir",
        &tmp.path().to_string_lossy(),
        "prune",
        "--category",
        "vehicles",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("vehicles"), "stderr: {}", stderr_of(&out));
}
