//! Run configuration as flat `key = value` lines.
//!
//! Keys use the same dotted namespace as [`ExperimentConfig::canonical`], so
//! the config lines echoed in a report load back into the same config.
//! Blank lines and lines starting with `#` or `;` are ignored. A `[section]`
//! line prefixes the keys below it with `section.`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use celebprof_core::classical::{Algorithm, FeaturesPerSplit};
use celebprof_core::corpus::{AgeBoundary, Demographic, LabelConfig};
use celebprof_core::evaluation::{ExperimentConfig, F1Variant, ModelKind, StratifyOn};
use celebprof_core::features::FeatureKind;
use celebprof_core::preprocess::CodeRange;

use crate::error::{io_error, CliError, Result};

/// Input and output locations of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Paths {
    /// A corpus archive.
    pub corpus: Option<PathBuf>,
    /// A directory of follower exports, one subdirectory per celebrity.
    pub feeds: Option<PathBuf>,
    /// The labels CSV that goes with `feeds`.
    pub labels: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

/// Everything a `run` needs: paths, label derivation and the experiment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub paths: Paths,
    /// Label settings for ingestion; `None` until a reference year is given.
    pub labels: Option<LabelConfig>,
    pub experiment: ExperimentConfig,
    /// Whether the file set `seed`.
    pub seed_given: bool,
}

fn bad_value(key: &str, value: &str, expected: &str) -> CliError {
    CliError::config(format!("{key}: cannot parse `{value}` as {expected}"))
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad_value(key, value, "a number"))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad_value(key, value, "a boolean")),
    }
}

fn list<T>(key: &str, value: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(s).ok_or_else(|| bad_value(key, s, "a known name")))
        .collect()
}

fn named<T>(key: &str, value: &str, parse: impl Fn(&str) -> Option<T>) -> Result<T> {
    parse(value).ok_or_else(|| bad_value(key, value, "a known name"))
}

fn code_ranges(key: &str, value: &str) -> Result<Vec<CodeRange>> {
    list(key, value, |item| {
        let (a, b) = item.split_once('-')?;
        Some(CodeRange::new(u32::from_str_radix(a, 16).ok()?, u32::from_str_radix(b, 16).ok()?))
    })
}

fn age_boundary(s: &str) -> Option<AgeBoundary> {
    [AgeBoundary::Lower, AgeBoundary::Upper].into_iter().find(|b| b.name() == s)
}

/// Applies one experiment setting.
pub fn set_experiment(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    let v = value;
    match key {
        "seed" => {
            let seed = num(key, v)?;
            cfg.seed = seed;
        }
        "models" => cfg.models = list(key, v, ModelKind::parse)?,
        "demographics" => cfg.demographics = list(key, v, |s| s.parse::<Demographic>().ok())?,
        "evaluation.f1_variant" => cfg.f1_variant = named(key, v, F1Variant::parse)?,
        "evaluation.averaging" => {
            if v != "macro" {
                return Err(bad_value(key, v, "`macro`"));
            }
        }
        "preprocess.urdu_ratio_threshold" => cfg.preprocess.urdu_ratio_threshold = num(key, v)?,
        "preprocess.urdu_ranges" => cfg.preprocess.urdu_ranges = code_ranges(key, v)?,
        "preprocess.strip_diacritics" => cfg.preprocess.strip_diacritics = flag(key, v)?,
        "preprocess.keep_digits" => cfg.preprocess.keep_digits = flag(key, v)?,
        "preprocess.min_tweets" => cfg.preprocess.min_tweets = num(key, v)?,
        "preprocess.keep_empty_documents" => cfg.preprocess.keep_empty_documents = flag(key, v)?,
        "features.kind" => cfg.features.kind = named(key, v, FeatureKind::parse)?,
        "features.min_df" => cfg.features.min_df = num(key, v)?,
        "features.sublinear_tf" => cfg.features.sublinear_tf = flag(key, v)?,
        "features.length_weight" => cfg.features.length_weight = num(key, v)?,
        "split.test_fraction" => cfg.split.test_fraction = num(key, v)?,
        "split.stratify_on" => cfg.split.stratify_on = named(key, v, StratifyOn::parse)?,
        "split.seed" => cfg.split.seed = num(key, v)?,
        "classical.algorithm" => cfg.classical.algorithm = named(key, v, Algorithm::parse)?,
        "classical.k_neighbors" => cfg.classical.k_neighbors = num(key, v)?,
        "classical.learning_rate" => cfg.classical.learning_rate = num(key, v)?,
        "classical.epochs" => cfg.classical.epochs = num(key, v)?,
        "classical.l2_penalty" => cfg.classical.l2_penalty = num(key, v)?,
        "classical.max_depth" => {
            cfg.classical.max_depth = if v == "none" { None } else { Some(num(key, v)?) };
        }
        "classical.min_leaf" => cfg.classical.min_leaf = num(key, v)?,
        "classical.n_trees" => cfg.classical.n_trees = num(key, v)?,
        "classical.bootstrap" => cfg.classical.bootstrap = flag(key, v)?,
        "classical.features_per_split" => {
            cfg.classical.features_per_split = named(key, v, FeaturesPerSplit::parse)?;
        }
        "classical.svm_c" => cfg.classical.svm_c = num(key, v)?,
        "classical.seed" => cfg.classical.seed = num(key, v)?,
        "neural.vocab_cap" => cfg.neural.vocab_cap = num(key, v)?,
        "neural.embed_dim" => cfg.neural.embed_dim = num(key, v)?,
        "neural.max_seq_len" => cfg.neural.max_seq_len = num(key, v)?,
        "neural.cnn_filters" => cfg.neural.cnn_filters = num(key, v)?,
        "neural.cnn_kernel" => cfg.neural.cnn_kernel = num(key, v)?,
        "neural.lstm_hidden" => cfg.neural.lstm_hidden = num(key, v)?,
        "neural.epochs" => cfg.neural.epochs = num(key, v)?,
        "neural.batch_size" => cfg.neural.batch_size = num(key, v)?,
        "neural.learning_rate" => cfg.neural.learning_rate = num(key, v)?,
        "neural.clip_norm" => cfg.neural.clip_norm = num(key, v)?,
        "neural.seed" => cfg.neural.seed = num(key, v)?,
        _ => return Err(CliError::config(format!("unknown config key `{key}`"))),
    }
    Ok(())
}

impl RunConfig {
    /// Applies one setting of any namespace.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let path = || Some(PathBuf::from(value));
        match key {
            "paths.corpus" => self.paths.corpus = path(),
            "paths.feeds" => self.paths.feeds = path(),
            "paths.labels" => self.paths.labels = path(),
            "paths.output" => self.paths.output = path(),
            "labels.reference_year" => self.labels_mut().reference_year = num(key, value)?,
            "labels.age_boundary" => self.labels_mut().age_boundary = named(key, value, age_boundary)?,
            "labels.followers_per_celebrity" => self.labels_mut().followers_per_celebrity = num(key, value)?,
            _ => {
                set_experiment(&mut self.experiment, key, value)?;
                if key == "seed" {
                    self.seed_given = true;
                }
            }
        }
        Ok(())
    }

    fn labels_mut(&mut self) -> &mut LabelConfig {
        // The year placeholder is rejected by `label_config` until set.
        self.labels.get_or_insert_with(|| LabelConfig::new(i32::MIN))
    }

    /// Label settings for ingestion, requiring an explicit reference year.
    pub fn label_config(&self) -> Result<LabelConfig> {
        match &self.labels {
            Some(l) if l.reference_year != i32::MIN => Ok(l.clone()),
            _ => Err(CliError::config("labels.reference_year is required to derive age groups")),
        }
    }

    /// Parses config text.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section = String::new();
        let mut split_seed_given = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected `key = value`", i + 1)))?;
            let key = key.trim();
            let key = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            let value = unquote(value.trim());
            cfg.set(&key, value).map_err(|e| CliError::config(format!("line {}: {}", i + 1, e.message)))?;
            split_seed_given |= key == "split.seed";
        }
        if cfg.seed_given && !split_seed_given {
            cfg.experiment.split.seed = cfg.experiment.seed;
        }
        Ok(cfg)
    }

    /// Loads a config file. A JSON file is read as a report and its
    /// embedded config lines are used.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let parsed = if text.trim_start().starts_with('{') {
            let lines = report_config_lines(&text).map_err(|e| e.at(path))?;
            Self::parse(&lines.join("\n"))
        } else {
            Self::parse(&text)
        };
        parsed.map_err(|e| e.at(path))
    }

    /// Sets the master seed; the split follows it.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.experiment = self.experiment.with_seed(seed);
        self.seed_given = true;
        self
    }

    /// Validates paths that are set and the experiment settings.
    pub fn validate(&self) -> Result<()> {
        for (name, path) in [
            ("paths.corpus", &self.paths.corpus),
            ("paths.feeds", &self.paths.feeds),
            ("paths.labels", &self.paths.labels),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    return Err(CliError::config(format!("{name}: {} does not exist", p.display())).at(p));
                }
            }
        }
        self.experiment.validate().map_err(|e| CliError::config(e.to_string()))
    }
}

fn unquote(value: &str) -> &str {
    value.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(value)
}

fn report_config_lines(text: &str) -> Result<Vec<String>> {
    let report: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::config(format!("not a report: {e}")))?;
    let lines = ["/payload/header/config_lines", "/header/config_lines"]
        .iter()
        .find_map(|p| report.pointer(p))
        .and_then(|v| v.as_array())
        .ok_or_else(|| CliError::config("report has no header.config_lines"))?;
    lines
        .iter()
        .map(|l| l.as_str().map(String::from).ok_or_else(|| CliError::config("config line is not text")))
        .collect()
}

/// The effective config file for `cfg`, loadable with [`RunConfig::parse`].
pub fn render_experiment(cfg: &ExperimentConfig) -> String {
    cfg.canonical()
}
