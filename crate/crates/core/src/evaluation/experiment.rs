//! The demographic x model grid: shared preparation, per-cell fit and
//! evaluation, and deterministic report assembly.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::metrics::{classification_metrics, crank, ConfusionMatrix, F1Variant, MetricsReport};
use super::split::{stratified_split, Split, SplitSpec};
use super::EvaluationError;
use crate::classical::{fit_classical, predict_classical, Algorithm, TrainConfig, TrainedModel};
use crate::corpus::{CelebrityLabels, Corpus, Demographic};
use crate::features::{FeatureConfig, FeaturePipeline};
use crate::fingerprint::fingerprint;
use crate::linalg::Matrix;
use crate::neural::{fit_neural, predict_neural, Architecture, NeuralConfig, NeuralModel};
use crate::preprocess::{preprocess_corpus, CleanDocument, PreprocessConfig, RetentionReport};
use crate::rng;

/// The seven compared models, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Knn,
    Logreg,
    Dtree,
    Rforest,
    Svm,
    Cnn,
    Lstm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Knn,
        ModelKind::Logreg,
        ModelKind::Dtree,
        ModelKind::Rforest,
        ModelKind::Svm,
        ModelKind::Cnn,
        ModelKind::Lstm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Knn => "knn",
            ModelKind::Logreg => "logreg",
            ModelKind::Dtree => "dtree",
            ModelKind::Rforest => "rforest",
            ModelKind::Svm => "svm",
            ModelKind::Cnn => "cnn",
            ModelKind::Lstm => "lstm",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ModelKind::Knn => "KNN",
            ModelKind::Logreg => "Logistic Regression",
            ModelKind::Dtree => "Decision Tree",
            ModelKind::Rforest => "Random Forest",
            ModelKind::Svm => "SVM",
            ModelKind::Cnn => "CNN",
            ModelKind::Lstm => "LSTM",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s.trim().to_ascii_lowercase())
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn algorithm(self) -> Option<Algorithm> {
        match self {
            ModelKind::Knn => Some(Algorithm::Knn),
            ModelKind::Logreg => Some(Algorithm::Logreg),
            ModelKind::Dtree => Some(Algorithm::Dtree),
            ModelKind::Rforest => Some(Algorithm::Rforest),
            ModelKind::Svm => Some(Algorithm::Svm),
            ModelKind::Cnn | ModelKind::Lstm => None,
        }
    }

    pub fn architecture(self) -> Option<Architecture> {
        match self {
            ModelKind::Cnn => Some(Architecture::Cnn),
            ModelKind::Lstm => Some(Architecture::Lstm),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Every knob of one experiment. `seed` is the master seed; per-cell seeds
/// are derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub models: Vec<ModelKind>,
    pub demographics: Vec<Demographic>,
    pub f1_variant: F1Variant,
    pub preprocess: PreprocessConfig,
    pub features: FeatureConfig,
    pub split: SplitSpec,
    pub classical: TrainConfig,
    pub neural: NeuralConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            models: ModelKind::ALL.to_vec(),
            demographics: Demographic::ALL.to_vec(),
            f1_variant: F1Variant::Standard,
            preprocess: PreprocessConfig::default(),
            features: FeatureConfig::default(),
            split: SplitSpec::default(),
            classical: TrainConfig::default(),
            neural: NeuralConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Sets the master seed and the split seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.split.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), EvaluationError> {
        let bad = |e: String| Err(EvaluationError::InvalidConfig(e));
        if self.models.is_empty() || self.demographics.is_empty() {
            return bad("models and demographics must be non-empty".into());
        }
        let mut models = self.models.clone();
        models.sort();
        models.dedup();
        let mut demos = self.demographics.clone();
        demos.sort();
        demos.dedup();
        if models.len() != self.models.len() || demos.len() != self.demographics.len() {
            return bad("models and demographics must not repeat".into());
        }
        if let Err(e) = self.preprocess.validate() {
            return bad(e.to_string());
        }
        if self.features.min_df == 0 {
            return bad("features.min_df must be >= 1".into());
        }
        if !(self.features.length_weight.is_finite() && self.features.length_weight >= 0.0) {
            return bad("features.length_weight must be >= 0".into());
        }
        self.split.validate()?;
        if let Err(e) = self.classical.validate() {
            return bad(e.to_string());
        }
        if let Err(e) = self.neural.validate() {
            return bad(e.to_string());
        }
        Ok(())
    }

    /// Every value as `key=value` lines in a fixed order.
    pub fn canonical(&self) -> String {
        let join = |names: Vec<&str>| names.join(",");
        let mut out = format!(
            "seed={}\nmodels={}\ndemographics={}\nevaluation.f1_variant={}\nevaluation.averaging=macro\n",
            self.seed,
            join(self.models.iter().map(|m| m.name()).collect()),
            join(self.demographics.iter().map(|d| d.name()).collect()),
            self.f1_variant,
        );
        out.push_str(&self.preprocess.canonical());
        out.push_str(&format!(
            "features.kind={}\nfeatures.min_df={}\nfeatures.sublinear_tf={}\nfeatures.length_weight={:?}\n",
            self.features.kind.name(),
            self.features.min_df,
            self.features.sublinear_tf,
            self.features.length_weight
        ));
        out.push_str(&self.split.canonical("split"));
        out.push_str(&self.classical.canonical("classical"));
        out.push_str(&self.neural.canonical("neural"));
        out
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(&self.canonical())
    }
}

/// Seed of the `(demographic, model)` cell, drawn from the master seed.
pub fn cell_seed(master: u64, demographic: Demographic, model: ModelKind) -> u64 {
    rng::stream(master, 1 + (demographic.index() * 16 + model.index()) as u64).next_u64()
}

/// Everything the cells of one demographic share: the split, cleaned
/// documents, labels and the feature matrices fitted on the training side.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub stratified_on: Demographic,
    pub split: Split,
    pub train_docs: Vec<CleanDocument>,
    pub test_docs: Vec<CleanDocument>,
    pub train_labels: Vec<CelebrityLabels>,
    pub test_labels: Vec<CelebrityLabels>,
    pub features: FeaturePipeline,
    pub x_train: Matrix,
    pub x_test: Matrix,
}

impl PreparedData {
    /// Splits `documents` stratified on `stratified_on` and fits features on
    /// the training side.
    pub fn new(
        documents: &[(CleanDocument, CelebrityLabels)],
        stratified_on: Demographic,
        config: &ExperimentConfig,
    ) -> Result<Self, EvaluationError> {
        let strata: Vec<(&str, usize)> =
            documents.iter().map(|(d, l)| (d.celebrity_id.as_str(), l.class_of(stratified_on))).collect();
        let split = stratified_split(&strata, &config.split)?;
        let by_id: BTreeMap<&str, &(CleanDocument, CelebrityLabels)> =
            documents.iter().map(|p| (p.0.celebrity_id.as_str(), p)).collect();
        let take = |ids: &[String]| -> (Vec<CleanDocument>, Vec<CelebrityLabels>) {
            ids.iter().map(|id| by_id[id.as_str()].clone()).unzip()
        };
        let (train_docs, train_labels) = take(&split.train);
        let (test_docs, test_labels) = take(&split.test);
        let data_err = |e: crate::features::FeatureError| EvaluationError::Data(e.to_string());
        let features = FeaturePipeline::fit(&train_docs, &config.features).map_err(data_err)?;
        let x_train = features.transform(&train_docs).map_err(data_err)?.to_dense();
        let x_test = features.transform(&test_docs).map_err(data_err)?.to_dense();
        Ok(Self { stratified_on, split, train_docs, test_docs, train_labels, test_labels, features, x_train, x_test })
    }

    pub fn labels(&self, demographic: Demographic, test: bool) -> Vec<usize> {
        let side = if test { &self.test_labels } else { &self.train_labels };
        side.iter().map(|l| l.class_of(demographic)).collect()
    }
}

fn class_order(demographic: Demographic) -> Vec<String> {
    demographic.class_names().iter().map(|s| s.to_string()).collect()
}

/// A model trained for one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FittedModel {
    Classical(TrainedModel),
    Neural(NeuralModel),
}

impl FittedModel {
    pub fn label_set(&self) -> &[String] {
        match self {
            FittedModel::Classical(m) => &m.label_set,
            FittedModel::Neural(m) => &m.label_set,
        }
    }

    /// Class indices for documents already in feature space (classical) or
    /// token form (neural).
    pub fn predict(&self, x: &Matrix, docs: &[CleanDocument]) -> Result<Vec<usize>, String> {
        match self {
            FittedModel::Classical(m) => predict_classical(m, x).map_err(|e| e.to_string()),
            FittedModel::Neural(m) => {
                let tokens: Vec<&[String]> = docs.iter().map(|d| d.tokens.as_slice()).collect();
                predict_neural(m, &tokens).map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub demographic: Demographic,
    pub model: ModelKind,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: MetricsReport,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CRankEntry {
    pub model: ModelKind,
    /// Macro F1 per demographic, in configured demographic order.
    pub f1_by_demographic: Vec<(Demographic, f64)>,
    pub crank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub demographic: Demographic,
    pub stratified_on: Demographic,
    /// False when the split fell back to an unstratified shuffle.
    pub stratified: bool,
    pub test_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub seed: u64,
    pub config_fingerprint: String,
    pub corpus_fingerprint: String,
    pub n_celebrities: usize,
    pub n_excluded: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub splits: Vec<SplitSummary>,
    /// `key=value` rendering of the effective config.
    pub config_lines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub header: ReportHeader,
    pub config: ExperimentConfig,
    pub cells: Vec<CellResult>,
    pub cranks: Vec<CRankEntry>,
}

/// Prepared data per demographic plus the list of cells to run.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub config: ExperimentConfig,
    /// One entry per configured demographic, in configured order.
    pub data: Vec<(Demographic, PreparedData)>,
    pub corpus_fingerprint: String,
    pub n_celebrities: usize,
    pub n_excluded: usize,
}

impl ExperimentPlan {
    /// Cleans `corpus` and prepares the shared data.
    pub fn from_corpus(corpus: &Corpus, config: &ExperimentConfig) -> Result<(Self, RetentionReport), EvaluationError> {
        config.validate()?;
        let (docs, retention) = preprocess_corpus(corpus.records(), &config.preprocess);
        let labels: BTreeMap<&str, &CelebrityLabels> =
            corpus.records().iter().map(|r| (r.celebrity_id.as_str(), &r.labels)).collect();
        let labelled = docs
            .into_iter()
            .map(|d| {
                let l = *labels[d.celebrity_id.as_str()];
                (d, l)
            })
            .collect();
        let plan = Self::from_documents(labelled, corpus.config_fingerprint(), corpus.len(), config)?;
        Ok((plan, retention))
    }

    /// Prepares already-cleaned, labelled documents.
    pub fn from_documents(
        documents: Vec<(CleanDocument, CelebrityLabels)>,
        corpus_fingerprint: &str,
        n_celebrities: usize,
        config: &ExperimentConfig,
    ) -> Result<Self, EvaluationError> {
        config.validate()?;
        let mut data: Vec<(Demographic, PreparedData)> = Vec::new();
        for &d in &config.demographics {
            let strata = config.split.stratify_on.resolve(d);
            let prepared = match data.iter().find(|(_, p)| p.stratified_on == strata) {
                Some((_, p)) => p.clone(),
                None => PreparedData::new(&documents, strata, config)?,
            };
            data.push((d, prepared));
        }
        Ok(Self {
            config: config.clone(),
            data,
            corpus_fingerprint: corpus_fingerprint.into(),
            n_celebrities,
            n_excluded: n_celebrities.saturating_sub(documents.len()),
        })
    }

    pub fn data_for(&self, demographic: Demographic) -> Result<&PreparedData, EvaluationError> {
        self.data.iter().find(|(d, _)| *d == demographic).map(|(_, p)| p).ok_or_else(|| {
            EvaluationError::InvalidConfig(format!("demographic {} not in the plan", demographic.name()))
        })
    }

    /// Cells in report order: demographics outer, models inner.
    pub fn cells(&self) -> Vec<(Demographic, ModelKind)> {
        self.config.demographics.iter().flat_map(|&d| self.config.models.iter().map(move |&m| (d, m))).collect()
    }

    pub fn fit(&self, demographic: Demographic, model: ModelKind) -> Result<FittedModel, EvaluationError> {
        fit_cell(self.data_for(demographic)?, &self.config, demographic, model)
    }

    pub fn evaluate(
        &self,
        demographic: Demographic,
        model: ModelKind,
        fitted: &FittedModel,
    ) -> Result<CellResult, EvaluationError> {
        evaluate_cell(self.data_for(demographic)?, &self.config, demographic, model, fitted)
    }

    pub fn run_cell(&self, demographic: Demographic, model: ModelKind) -> Result<CellResult, EvaluationError> {
        let fitted = self.fit(demographic, model)?;
        self.evaluate(demographic, model, &fitted)
    }

    /// Orders `results` by the configured grid and adds the cRank table.
    pub fn assemble(&self, results: Vec<CellResult>) -> Result<EvaluationReport, EvaluationError> {
        let mut cells = Vec::with_capacity(results.len());
        let mut pool = results;
        for (d, m) in self.cells() {
            let pos = pool
                .iter()
                .position(|c| c.demographic == d && c.model == m)
                .ok_or_else(|| EvaluationError::Data(format!("missing result for {}/{}", d.name(), m.name())))?;
            cells.push(pool.swap_remove(pos));
        }
        let cranks = self
            .config
            .models
            .iter()
            .map(|&m| {
                let f1_by_demographic: Vec<(Demographic, f64)> =
                    cells.iter().filter(|c| c.model == m).map(|c| (c.demographic, c.metrics.macro_f1)).collect();
                let scores: Vec<f64> = f1_by_demographic.iter().map(|(_, f)| *f).collect();
                CRankEntry { model: m, crank: crank(&scores), f1_by_demographic }
            })
            .collect();
        let config_lines = self.config.canonical().lines().map(String::from).collect();
        Ok(EvaluationReport {
            header: ReportHeader {
                seed: self.config.seed,
                config_fingerprint: self.config.fingerprint(),
                corpus_fingerprint: self.corpus_fingerprint.clone(),
                n_celebrities: self.n_celebrities,
                n_excluded: self.n_excluded,
                n_train: self.data.first().map_or(0, |(_, p)| p.split.train.len()),
                n_test: self.data.first().map_or(0, |(_, p)| p.split.test.len()),
                splits: self
                    .data
                    .iter()
                    .map(|(d, p)| SplitSummary {
                        demographic: *d,
                        stratified_on: p.stratified_on,
                        stratified: p.split.stratified,
                        test_ids: p.split.test.clone(),
                    })
                    .collect(),
                config_lines,
            },
            config: self.config.clone(),
            cells,
            cranks,
        })
    }
}

fn cell_err(d: Demographic, m: ModelKind, message: String) -> EvaluationError {
    EvaluationError::Cell { demographic: d.name(), model: m.name(), message }
}

/// Trains one model for one demographic on the training side.
pub fn fit_cell(
    data: &PreparedData,
    config: &ExperimentConfig,
    demographic: Demographic,
    model: ModelKind,
) -> Result<FittedModel, EvaluationError> {
    let seed = cell_seed(config.seed, demographic, model);
    let y = data.labels(demographic, false);
    let labels = class_order(demographic);
    if let Some(algorithm) = model.algorithm() {
        let cfg = TrainConfig { algorithm, seed, ..config.classical.clone() };
        fit_classical(&data.x_train, &y, &labels, &cfg)
            .map(FittedModel::Classical)
            .map_err(|e| cell_err(demographic, model, e.to_string()))
    } else {
        let arch = model.architecture().expect("neural model");
        let cfg = NeuralConfig { seed, ..config.neural.clone() };
        let tokens: Vec<&[String]> = data.train_docs.iter().map(|d| d.tokens.as_slice()).collect();
        fit_neural(arch, &tokens, &y, labels, &cfg)
            .map(FittedModel::Neural)
            .map_err(|e| cell_err(demographic, model, e.to_string()))
    }
}

/// Scores a fitted model on the test side.
pub fn evaluate_cell(
    data: &PreparedData,
    config: &ExperimentConfig,
    demographic: Demographic,
    model: ModelKind,
    fitted: &FittedModel,
) -> Result<CellResult, EvaluationError> {
    let labels = class_order(demographic);
    if fitted.label_set() != labels.as_slice() {
        return Err(cell_err(demographic, model, "model label set does not match the demographic".into()));
    }
    let predicted = fitted.predict(&data.x_test, &data.test_docs).map_err(|e| cell_err(demographic, model, e))?;
    let truth = data.labels(demographic, true);
    let confusion = ConfusionMatrix::from_indices(&truth, &predicted, &labels)?;
    let metrics = classification_metrics(&confusion, config.f1_variant)?;
    Ok(CellResult {
        demographic,
        model,
        seed: cell_seed(config.seed, demographic, model),
        n_train: data.train_docs.len(),
        n_test: data.test_docs.len(),
        metrics,
        confusion,
    })
}

/// Runs the whole grid sequentially.
pub fn run_experiment(corpus: &Corpus, config: &ExperimentConfig) -> Result<EvaluationReport, EvaluationError> {
    let (plan, _) = ExperimentPlan::from_corpus(corpus, config)?;
    let results = plan.cells().into_iter().map(|(d, m)| plan.run_cell(d, m)).collect::<Result<Vec<_>, _>>()?;
    plan.assemble(results)
}
