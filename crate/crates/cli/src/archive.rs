//! Versioned JSON artifacts.
//!
//! Every artifact is an envelope naming its kind, layout version and the
//! fingerprint of the config that produced it, around a typed payload.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use celebprof_core::corpus::Corpus;
use celebprof_core::evaluation::{FittedModel, ModelKind};
use celebprof_core::features::FeaturePipeline;
use celebprof_core::preprocess::{CleanDocument, PreprocessConfig, RetentionReport};
use celebprof_core::{CelebrityLabels, Demographic, CORPUS_FORMAT_VERSION};

use crate::error::{io_error, write_error, CliError, Result};

/// Layout version of the non-corpus artifacts.
pub const ARTIFACT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtifactKind {
    Corpus,
    CleanCorpus,
    Retention,
    Model,
    Report,
}

impl ArtifactKind {
    pub fn name(self) -> &'static str {
        match self {
            ArtifactKind::Corpus => "corpus",
            ArtifactKind::CleanCorpus => "clean_corpus",
            ArtifactKind::Retention => "retention",
            ArtifactKind::Model => "model",
            ArtifactKind::Report => "report",
        }
    }

    pub fn format_version(self) -> u32 {
        match self {
            ArtifactKind::Corpus | ArtifactKind::CleanCorpus => CORPUS_FORMAT_VERSION,
            _ => ARTIFACT_FORMAT_VERSION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub kind: String,
    pub format_version: u32,
    pub config_fingerprint: String,
    pub payload: T,
}

/// Only the envelope fields, read before committing to a payload type.
#[derive(Deserialize)]
struct Head {
    kind: String,
    format_version: u32,
}

/// Serializes an artifact. Output is deterministic for equal inputs.
pub fn to_json<T: Serialize>(kind: ArtifactKind, fingerprint: &str, payload: &T) -> Result<String> {
    let envelope = Envelope {
        kind: kind.name().to_string(),
        format_version: kind.format_version(),
        config_fingerprint: fingerprint.to_string(),
        payload,
    };
    let mut text = serde_json::to_string_pretty(&envelope).map_err(|e| CliError::internal(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Parses an artifact of `kind`, checking kind and version.
pub fn from_json<T: DeserializeOwned>(kind: ArtifactKind, text: &str) -> Result<Envelope<T>> {
    let head: Head =
        serde_json::from_str(text).map_err(|e| CliError::data(format!("corrupted {} archive: {e}", kind.name())))?;
    if head.kind != kind.name() {
        return Err(CliError::data(format!("expected a {} archive, found `{}`", kind.name(), head.kind)));
    }
    if head.format_version != kind.format_version() {
        return Err(CliError::data(format!(
            "unsupported {} format version {} (this build reads {})",
            kind.name(),
            head.format_version,
            kind.format_version()
        )));
    }
    serde_json::from_str(text).map_err(|e| CliError::data(format!("corrupted {} archive: {e}", kind.name())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| write_error(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| write_error(path, e))
}

pub fn save<T: Serialize>(path: &Path, kind: ArtifactKind, fingerprint: &str, payload: &T) -> Result<()> {
    write_text(path, &to_json(kind, fingerprint, payload)?)
}

pub fn load<T: DeserializeOwned>(path: &Path, kind: ArtifactKind) -> Result<Envelope<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    from_json(kind, &text).map_err(|e| e.at(path))
}

pub fn save_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    save(path, ArtifactKind::Corpus, corpus.config_fingerprint(), corpus)
}

/// Loads a corpus archive and rechecks its invariants.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let envelope: Envelope<Corpus> = load(path, ArtifactKind::Corpus)?;
    let corpus = envelope.payload;
    if corpus.config_fingerprint() != envelope.config_fingerprint {
        return Err(CliError::data("corpus fingerprint does not match its envelope").at(path));
    }
    let fingerprint = corpus.config_fingerprint().to_string();
    let records = corpus.into_records();
    for record in &records {
        for feed in &record.feeds {
            for tweet in &feed.records {
                tweet.validate().map_err(|e| CliError::data(format!("`{}`: {e}", record.celebrity_id)).at(path))?;
            }
        }
    }
    Corpus::new(records, fingerprint).map_err(|e| CliError::data(e.to_string()).at(path))
}

/// Cleaned documents with their labels, ready for modelling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanCorpus {
    pub corpus_fingerprint: String,
    pub n_celebrities: usize,
    pub preprocess: PreprocessConfig,
    pub documents: Vec<LabelledDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelledDocument {
    pub document: CleanDocument,
    pub labels: CelebrityLabels,
}

impl CleanCorpus {
    pub fn pairs(&self) -> Vec<(CleanDocument, CelebrityLabels)> {
        self.documents.iter().map(|d| (d.document.clone(), d.labels)).collect()
    }
}

/// A trained cell with what prediction on new feeds needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub demographic: Demographic,
    pub model: ModelKind,
    pub seed: u64,
    pub corpus_fingerprint: String,
    pub preprocess: PreprocessConfig,
    /// Feature pipeline of the training side; classical models only.
    pub features: Option<FeaturePipeline>,
    pub fitted: FittedModel,
}

impl ModelBundle {
    pub fn file_name(demographic: Demographic, model: ModelKind) -> String {
        format!("{}-{}.json", demographic.name(), model.name())
    }
}

/// Retention report with the fingerprint of the preprocessing config.
pub fn save_retention(path: &Path, fingerprint: &str, report: &RetentionReport) -> Result<()> {
    save(path, ArtifactKind::Retention, fingerprint, report)
}
