//! Classical classifiers behind one fit/predict contract.
//!
//! Labels are class indices into an ordered `label_set`; every tie (KNN votes,
//! split selection, forest votes) resolves toward the lower index.

mod forest;
mod knn;
mod logreg;
mod svm;
mod tree;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

pub use forest::{fit_random_forest, RandomForest};
pub use knn::{knn_classify, KnnModel};
pub use logreg::{fit_logistic_regression, SoftmaxRegression};
pub use svm::{fit_linear_svm, hinge_loss, LinearSvm};
pub use tree::{entropy, fit_decision_tree, information_gain, DecisionTree, TreeNode};

use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("k = {k} exceeds the {n_train} training rows")]
    TooManyNeighbors { k: usize, n_train: usize },
    #[error("training labels contain fewer than two classes")]
    DegenerateLabels,
    #[error("feature width mismatch: model expects {expected}, input has {found}")]
    Dimension { expected: usize, found: usize },
    #[error("label {label} outside label set of size {n_classes}")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("partition does not match parent labels")]
    InvalidPartition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Knn,
    Logreg,
    Dtree,
    Rforest,
    Svm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::Knn, Algorithm::Logreg, Algorithm::Dtree, Algorithm::Rforest, Algorithm::Svm];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Knn => "knn",
            Algorithm::Logreg => "logreg",
            Algorithm::Dtree => "dtree",
            Algorithm::Rforest => "rforest",
            Algorithm::Svm => "svm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeaturesPerSplit {
    #[default]
    Sqrt,
    All,
}

impl FeaturesPerSplit {
    pub fn count(self, n_features: usize) -> usize {
        match self {
            FeaturesPerSplit::All => n_features,
            FeaturesPerSplit::Sqrt => (libm::floor(libm::sqrt(n_features as f64)) as usize).max(1).min(n_features),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeaturesPerSplit::Sqrt => "sqrt",
            FeaturesPerSplit::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [FeaturesPerSplit::Sqrt, FeaturesPerSplit::All].into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub k_neighbors: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_penalty: f64,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub n_trees: usize,
    pub bootstrap: bool,
    pub features_per_split: FeaturesPerSplit,
    pub svm_c: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Logreg,
            k_neighbors: 5,
            learning_rate: 0.1,
            epochs: 200,
            l2_penalty: 1e-3,
            max_depth: None,
            min_leaf: 2,
            n_trees: 100,
            bootstrap: true,
            features_per_split: FeaturesPerSplit::Sqrt,
            svm_c: 1.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        Self { algorithm, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidConfig(m.into()));
        if self.k_neighbors == 0 {
            return bad("k_neighbors must be >= 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1");
        }
        if self.n_trees == 0 {
            return bad("n_trees must be >= 1");
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.learning_rate) || !positive(self.l2_penalty) || !positive(self.svm_c) {
            return bad("learning_rate, l2_penalty and svm_c must be > 0");
        }
        Ok(())
    }

    /// `key=value` lines under the given prefix, in a fixed order.
    pub fn canonical(&self, prefix: &str) -> String {
        let depth = self.max_depth.map_or(String::from("none"), |d| format!("{d}"));
        format!(
            "{p}.algorithm={}\n{p}.k_neighbors={}\n{p}.learning_rate={:?}\n{p}.epochs={}\n\
             {p}.l2_penalty={:?}\n{p}.max_depth={}\n{p}.min_leaf={}\n{p}.n_trees={}\n\
             {p}.bootstrap={}\n{p}.features_per_split={}\n{p}.svm_c={:?}\n{p}.seed={}\n",
            self.algorithm,
            self.k_neighbors,
            self.learning_rate,
            self.epochs,
            self.l2_penalty,
            depth,
            self.min_leaf,
            self.n_trees,
            self.bootstrap,
            self.features_per_split.name(),
            self.svm_c,
            self.seed,
            p = prefix
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Knn(KnnModel),
    Logreg(SoftmaxRegression),
    Dtree(DecisionTree),
    Rforest(RandomForest),
    Svm(LinearSvm),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub algorithm: Algorithm,
    pub label_set: Vec<String>,
    pub n_features: usize,
    pub config: TrainConfig,
    pub params: ModelParams,
}

pub(crate) fn check_training_data(x: &Matrix, y: &[usize], n_classes: usize) -> Result<(), ModelError> {
    if x.rows() == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    if x.rows() != y.len() {
        return Err(ModelError::LengthMismatch { rows: x.rows(), labels: y.len() });
    }
    if let Some(&label) = y.iter().find(|&&l| l >= n_classes) {
        return Err(ModelError::LabelOutOfRange { label, n_classes });
    }
    Ok(())
}

pub(crate) fn distinct_classes(y: &[usize]) -> usize {
    let mut seen: Vec<usize> = y.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Index of the largest count; lowest index wins ties.
pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Fits the algorithm named in `config`.
pub fn fit_classical(
    x: &Matrix,
    y: &[usize],
    label_set: &[String],
    config: &TrainConfig,
) -> Result<TrainedModel, ModelError> {
    config.validate()?;
    let n_classes = label_set.len();
    check_training_data(x, y, n_classes)?;
    let params = match config.algorithm {
        Algorithm::Knn => {
            if config.k_neighbors > x.rows() {
                return Err(ModelError::TooManyNeighbors { k: config.k_neighbors, n_train: x.rows() });
            }
            ModelParams::Knn(KnnModel { train: x.clone(), labels: y.to_vec(), k: config.k_neighbors, n_classes })
        }
        Algorithm::Logreg => ModelParams::Logreg(fit_logistic_regression(x, y, n_classes, config)?.0),
        Algorithm::Dtree => ModelParams::Dtree(fit_decision_tree(x, y, n_classes, config)?),
        Algorithm::Rforest => ModelParams::Rforest(fit_random_forest(x, y, n_classes, config)?),
        Algorithm::Svm => ModelParams::Svm(fit_linear_svm(x, y, n_classes, config)?),
    };
    Ok(TrainedModel {
        algorithm: config.algorithm,
        label_set: label_set.to_vec(),
        n_features: x.cols(),
        config: config.clone(),
        params,
    })
}

/// Predicted class indices, one per row of `x`.
pub fn predict_classical(model: &TrainedModel, x: &Matrix) -> Result<Vec<usize>, ModelError> {
    if x.rows() == 0 {
        return Ok(Vec::new());
    }
    if x.cols() != model.n_features {
        return Err(ModelError::Dimension { expected: model.n_features, found: x.cols() });
    }
    Ok(match &model.params {
        ModelParams::Knn(m) => m.predict(x)?,
        ModelParams::Logreg(m) => m.predict(x),
        ModelParams::Dtree(m) => m.predict(x),
        ModelParams::Rforest(m) => m.predict(x),
        ModelParams::Svm(m) => m.predict(x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn labels(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn dispatch_contract() {
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.1, 0.0], vec![0.9, 1.0]], 2).unwrap();
        let y = [0, 1, 0, 1];
        for alg in Algorithm::ALL {
            let cfg = TrainConfig { k_neighbors: 1, n_trees: 5, ..TrainConfig::for_algorithm(alg) };
            let model = fit_classical(&x, &y, &labels(2), &cfg).unwrap();
            assert!(predict_classical(&model, &Matrix::zeros(0, 2)).unwrap().is_empty());
            assert_eq!(predict_classical(&model, &x).unwrap().len(), 4);
            assert_eq!(
                predict_classical(&model, &Matrix::zeros(1, 3)),
                Err(ModelError::Dimension { expected: 2, found: 3 })
            );
        }
        let knn = fit_classical(
            &x,
            &y,
            &labels(2),
            &TrainConfig { k_neighbors: 1, ..TrainConfig::for_algorithm(Algorithm::Knn) },
        )
        .unwrap();
        assert_eq!(predict_classical(&knn, &x).unwrap(), y);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        assert!(TrainConfig { k_neighbors: 0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { learning_rate: 0.0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { n_trees: 0, ..TrainConfig::default() }.validate().is_err());
        let x = Matrix::zeros(2, 1);
        assert_eq!(
            fit_classical(
                &x,
                &[0, 1],
                &labels(2),
                &TrainConfig { k_neighbors: 3, ..TrainConfig::for_algorithm(Algorithm::Knn) }
            ),
            Err(ModelError::TooManyNeighbors { k: 3, n_train: 2 })
        );
        assert_eq!(
            fit_classical(&Matrix::zeros(0, 1), &[], &labels(2), &TrainConfig::default()),
            Err(ModelError::EmptyTrainingSet)
        );
        assert!(matches!(
            fit_classical(&x, &[0, 5], &labels(2), &TrainConfig::default()),
            Err(ModelError::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn sqrt_rule() {
        assert_eq!(FeaturesPerSplit::Sqrt.count(100), 10);
        assert_eq!(FeaturesPerSplit::Sqrt.count(1), 1);
        assert_eq!(FeaturesPerSplit::Sqrt.count(0), 0);
        assert_eq!(FeaturesPerSplit::All.count(7), 7);
    }
}
