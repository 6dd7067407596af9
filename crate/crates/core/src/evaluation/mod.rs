//! Metrics, splitting and the demographic x model experiment grid.

mod experiment;
mod metrics;
mod report;
mod split;

use alloc::string::String;

pub use experiment::{
    cell_seed, evaluate_cell, fit_cell, run_experiment, CRankEntry, CellResult, EvaluationReport, ExperimentConfig,
    ExperimentPlan, FittedModel, ModelKind, PreparedData, ReportHeader, SplitSummary,
};
pub use metrics::{
    classification_metrics, confusion_matrix, crank, ClassMetrics, ConfusionMatrix, F1Variant, MetricsReport,
};
pub use report::render_text_report;
pub use split::{stratified_split, Split, SplitSpec, StratifyOn};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvaluationError {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("{truth} true labels but {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{demographic}/{model}: {message}")]
    Cell { demographic: &'static str, model: &'static str, message: String },
}
