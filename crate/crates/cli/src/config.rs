//! Run configuration: a TOML file plus flag overrides.
//!
//! Paths inside the config file resolve against the config file's
//! directory; paths given on the command line resolve against the working
//! directory. Flags always win over file values.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::errors::{CliError, CliResult};
use crate::Cli;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    embedding: Option<PathBuf>,
    corpus: Option<PathBuf>,
    norms_ratings: Option<PathBuf>,
    norms_areas: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    window: Option<usize>,
    frequency_cutoff: Option<u32>,
    nonzero_threshold: Option<f64>,
    significance: Option<f64>,
    probe_k: Option<usize>,
    components: Option<usize>,
    workers: Option<usize>,
    #[serde(default, rename = "category")]
    categories: Vec<RawCategory>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCategory {
    name: String,
    ratings: PathBuf,
    words: Option<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct Category {
    pub name: String,
    pub ratings: PathBuf,
    /// Optional explicit word list; defaults to the ratings vocabulary.
    pub words: Option<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub embedding: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub norms_ratings: Option<PathBuf>,
    pub norms_areas: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub window: usize,
    pub frequency_cutoff: u32,
    pub nonzero_threshold: f64,
    pub significance: f64,
    pub probe_k: usize,
    pub components: usize,
    /// 0 leaves the pool size to the runtime.
    pub workers: usize,
    pub categories: Vec<Category>,
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

pub fn load(cli: &Cli) -> CliResult<Config> {
    let (raw, base) = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::User(format!("cannot read config {}: {e}", path.display()))
            })?;
            let raw: RawConfig = toml::from_str(&text).map_err(|e| {
                CliError::User(format!("invalid config {}: {e}", path.display()))
            })?;
            let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
            (raw, base)
        }
        None => (
            RawConfig {
                embedding: None,
                corpus: None,
                norms_ratings: None,
                norms_areas: None,
                output_dir: None,
                window: None,
                frequency_cutoff: None,
                nonzero_threshold: None,
                significance: None,
                probe_k: None,
                components: None,
                workers: None,
                categories: Vec::new(),
            },
            PathBuf::from("."),
        ),
    };

    let file_path = |p: Option<PathBuf>| p.map(|p| resolve(&base, p));
    let flag_path = |p: &Option<PathBuf>| p.clone();

    let config = Config {
        embedding: flag_path(&cli.embedding).or_else(|| file_path(raw.embedding)),
        corpus: flag_path(&cli.corpus).or_else(|| file_path(raw.corpus)),
        norms_ratings: flag_path(&cli.norms_ratings).or_else(|| file_path(raw.norms_ratings)),
        norms_areas: flag_path(&cli.norms_areas).or_else(|| file_path(raw.norms_areas)),
        output_dir: flag_path(&cli.output_dir)
            .or_else(|| file_path(raw.output_dir))
            .unwrap_or_else(|| PathBuf::from("semprune-out")),
        window: cli.window.or(raw.window).unwrap_or(2),
        frequency_cutoff: cli.frequency_cutoff.or(raw.frequency_cutoff).unwrap_or(15_000),
        nonzero_threshold: cli.nonzero_threshold.or(raw.nonzero_threshold).unwrap_or(0.6),
        significance: cli.significance.or(raw.significance).unwrap_or(0.05),
        probe_k: cli.probe_k.or(raw.probe_k).unwrap_or(60),
        components: cli.components.or(raw.components).unwrap_or(30),
        workers: cli.workers.or(raw.workers).unwrap_or(0),
        categories: raw
            .categories
            .into_iter()
            .map(|c| Category {
                name: c.name,
                ratings: resolve(&base, c.ratings),
                words: c.words,
            })
            .collect(),
    };
    validate(&config)?;
    Ok(config)
}

fn validate(c: &Config) -> CliResult<()> {
    let user = |m: String| Err(CliError::User(m));
    if c.window < 1 {
        return user("window must be at least 1".into());
    }
    if c.frequency_cutoff < 1 {
        return user("frequency_cutoff must be at least 1".into());
    }
    if !(c.nonzero_threshold > 0.0 && c.nonzero_threshold < 1.0) {
        return user(format!(
            "nonzero_threshold must lie strictly between 0 and 1, got {}",
            c.nonzero_threshold
        ));
    }
    if !(c.significance > 0.0 && c.significance < 1.0) {
        return user(format!(
            "significance must lie strictly between 0 and 1, got {}",
            c.significance
        ));
    }
    if c.probe_k < 1 {
        return user("probe_k must be at least 1".into());
    }
    if c.components < 1 {
        return user("components must be at least 1".into());
    }
    let mut names: Vec<&str> = c.categories.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    if names.len() != c.categories.len() {
        return user("category names must be unique".into());
    }
    if c.categories.iter().any(|c| c.name.is_empty()) {
        return user("category names must be non-empty".into());
    }
    for (role, path) in [
        ("embedding", &c.embedding),
        ("corpus", &c.corpus),
        ("norms_ratings", &c.norms_ratings),
        ("norms_areas", &c.norms_areas),
    ] {
        if let Some(p) = path {
            if !p.is_file() {
                return user(format!("{role} file {} does not exist", p.display()));
            }
        }
    }
    for cat in &c.categories {
        if !cat.ratings.is_file() {
            return user(format!(
                "ratings file {} for category {:?} does not exist",
                cat.ratings.display(),
                cat.name
            ));
        }
        if let Some(words) = &cat.words {
            if words.len() < 4 {
                return user(format!(
                    "category {:?} lists {} words; at least 4 are needed",
                    cat.name,
                    words.len()
                ));
            }
        }
    }
    Ok(())
}

pub fn require<'a>(field: &'a Option<PathBuf>, what: &str) -> CliResult<&'a Path> {
    match field {
        Some(p) => Ok(p.as_path()),
        None => Err(CliError::User(format!(
            "no {what} configured (set `{what}` in the config file or pass --{})",
            what.replace('_', "-")
        ))),
    }
}

impl Config {
    pub fn category(&self, name: &str) -> CliResult<&Category> {
        self.categories.iter().find(|c| c.name == name).ok_or_else(|| {
            CliError::User(format!("category {name:?} is not defined in the configuration"))
        })
    }

    /// Default solution artifact path for a category.
    pub fn solution_path(&self, category: &str) -> PathBuf {
        self.output_dir.join("prune").join(format!("{category}.solution.json"))
    }

    /// Cache file for the configured corpus and window, under the output
    /// directory so runs are self-contained.
    pub fn cache_path(&self, corpus: &Path) -> PathBuf {
        let name = corpus
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "corpus".to_string());
        self.output_dir.join("cache").join(format!("{name}.w{}.cache", self.window))
    }
}
