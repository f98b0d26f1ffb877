//! TOML run configuration. Command-line flags override these values.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use webcred::corpus::Aggregation;
use webcred::features::FeatureConfig;
use webcred::html2seq::DEFAULT_PAD_GRID;
use webcred::ingest::FetchPolicy;
use webcred::learn::LearnerSpec;

use crate::Failure;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub cache_dir: PathBuf,
    pub fetch: FetchPolicy,
    pub tables: TablesConfig,
    pub features: FeatureConfig,
    pub corpus: CorpusConfig,
    pub learn: LearnConfig,
    pub sweep: SweepConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 42,
            cache_dir: PathBuf::from("cache"),
            fetch: FetchPolicy::default(),
            tables: TablesConfig::default(),
            features: FeatureConfig::default(),
            corpus: CorpusConfig::default(),
            learn: LearnConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TablesConfig {
    pub dir: PathBuf,
    pub gi: String,
    pub valence: String,
    pub opensources: String,
    pub pagerank: String,
    /// Capture fixture used when no endpoint is configured.
    pub archive: String,
    /// Live CDX endpoint, e.g. the Wayback Machine's.
    pub archive_endpoint: Option<String>,
    /// Reference time for archive age; defaults to the latest fetch time.
    pub as_of: Option<String>,
    pub disable: Vec<String>,
}

impl Default for TablesConfig {
    fn default() -> Self {
        TablesConfig {
            dir: PathBuf::from("tables"),
            gi: "gi.tsv".into(),
            valence: "valence.tsv".into(),
            opensources: "opensources.txt".into(),
            pagerank: "pagerank.tsv".into(),
            archive: "archive.tsv".into(),
            archive_endpoint: None,
            as_of: None,
            disable: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub format: String,
    pub aggregation: Aggregation,
    pub skip_bad_rows: bool,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            format: "microsoft".into(),
            aggregation: Aggregation::Mean,
            skip_bad_rows: false,
        }
    }
}

/// A learner given by name with default hyperparameters, or spelled out.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LearnerChoice {
    Name(String),
    Spec(LearnerSpec),
}

impl LearnerChoice {
    pub fn resolve(&self) -> Result<LearnerSpec, Failure> {
        match self {
            LearnerChoice::Spec(s) => Ok(*s),
            LearnerChoice::Name(n) => LearnerSpec::from_name(n)
                .ok_or_else(|| Failure::usage(format!("unknown learner {n:?} (expected nb, adaboost, gb, ridge or svr)"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnConfig {
    pub scheme: String,
    pub learner: LearnerChoice,
    pub percentile: f64,
    pub top_k: Option<usize>,
    pub folds: usize,
    pub stack_pad: Option<usize>,
    pub tag_learner: LearnerChoice,
    pub inner_folds: usize,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            scheme: "two_class".into(),
            learner: LearnerChoice::Name("gb".into()),
            percentile: 25.0,
            top_k: None,
            folds: 10,
            stack_pad: None,
            tag_learner: LearnerChoice::Name("nb".into()),
            inner_folds: 5,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub grid: Vec<usize>,
    pub learner: LearnerChoice,
    pub percentile: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            grid: DEFAULT_PAD_GRID.to_vec(),
            learner: LearnerChoice::Name("nb".into()),
            percentile: 100.0,
        }
    }
}

impl Config {
    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: Config =
            toml::from_str(&text).map_err(|e| Failure::usage(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.cache_dir, &mut cfg.tables.dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}
