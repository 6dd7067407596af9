//! Confusion matrices, per-class and macro metrics, and cRank.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

use super::EvaluationError;

/// `counts[i][j]` is the number of samples of true class `i` predicted as `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub class_order: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(class_order: Vec<String>) -> Self {
        let k = class_order.len();
        Self { class_order, counts: vec![vec![0; k]; k] }
    }

    /// Builds the matrix from class indices into `class_order`.
    pub fn from_indices(y_true: &[usize], y_pred: &[usize], class_order: &[String]) -> Result<Self, EvaluationError> {
        if y_true.len() != y_pred.len() {
            return Err(EvaluationError::LengthMismatch { truth: y_true.len(), predicted: y_pred.len() });
        }
        let mut cm = Self::zeros(class_order.to_vec());
        let k = class_order.len();
        for (&t, &p) in y_true.iter().zip(y_pred) {
            if let Some(&bad) = [t, p].iter().find(|&&c| c >= k) {
                return Err(EvaluationError::UnknownLabel(alloc::format!("class index {bad}")));
            }
            cm.counts[t][p] += 1;
        }
        Ok(cm)
    }

    pub fn n_classes(&self) -> usize {
        self.class_order.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn true_positives(&self, class: usize) -> u64 {
        self.counts[class][class]
    }

    pub fn false_positives(&self, class: usize) -> u64 {
        (0..self.n_classes()).filter(|&i| i != class).map(|i| self.counts[i][class]).sum()
    }

    pub fn false_negatives(&self, class: usize) -> u64 {
        (0..self.n_classes()).filter(|&j| j != class).map(|j| self.counts[class][j]).sum()
    }

    pub fn true_negatives(&self, class: usize) -> u64 {
        self.total() - self.true_positives(class) - self.false_positives(class) - self.false_negatives(class)
    }
}

/// Confusion matrix over label names.
pub fn confusion_matrix<S: AsRef<str>>(
    y_true: &[S],
    y_pred: &[S],
    class_order: &[String],
) -> Result<ConfusionMatrix, EvaluationError> {
    let index = |label: &S| {
        class_order
            .iter()
            .position(|c| c == label.as_ref())
            .ok_or_else(|| EvaluationError::UnknownLabel(label.as_ref().to_string()))
    };
    let truth = y_true.iter().map(index).collect::<Result<Vec<_>, _>>()?;
    let predicted = y_pred.iter().map(index).collect::<Result<Vec<_>, _>>()?;
    ConfusionMatrix::from_indices(&truth, &predicted, class_order)
}

/// `Standard` is `2PR/(P+R)`; `Paper` is the literal `PR/(P+R)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum F1Variant {
    #[default]
    Standard,
    Paper,
}

impl F1Variant {
    pub fn name(self) -> &'static str {
        match self {
            F1Variant::Standard => "standard",
            F1Variant::Paper => "paper",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" => Some(F1Variant::Standard),
            "paper" => Some(F1Variant::Paper),
            _ => None,
        }
    }

    pub fn f1(self, precision: f64, recall: f64) -> f64 {
        let sum = precision + recall;
        if sum == 0.0 {
            return 0.0;
        }
        match self {
            F1Variant::Standard => 2.0 * precision * recall / sum,
            F1Variant::Paper => precision * recall / sum,
        }
    }
}

impl fmt::Display for F1Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub f1_variant: F1Variant,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy plus one-vs-rest precision, recall and F1 per class and their
/// unweighted means. `0/0` counts as 0.
pub fn classification_metrics(cm: &ConfusionMatrix, variant: F1Variant) -> Result<MetricsReport, EvaluationError> {
    let total = cm.total();
    if total == 0 || cm.n_classes() == 0 {
        return Err(EvaluationError::EmptyMatrix);
    }
    let per_class: Vec<ClassMetrics> = (0..cm.n_classes())
        .map(|c| {
            let tp = cm.true_positives(c);
            let precision = ratio(tp, tp + cm.false_positives(c));
            let recall = ratio(tp, tp + cm.false_negatives(c));
            ClassMetrics { label: cm.class_order[c].clone(), precision, recall, f1: variant.f1(precision, recall) }
        })
        .collect();
    let k = per_class.len() as f64;
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k;
    Ok(MetricsReport {
        accuracy: ratio(cm.trace(), total),
        macro_precision: mean(|m| m.precision),
        macro_recall: mean(|m| m.recall),
        macro_f1: mean(|m| m.f1),
        per_class,
        f1_variant: variant,
    })
}

/// Harmonic mean of the per-demographic F1 scores; 0 when any of them is 0.
pub fn crank(f1_scores: &[f64]) -> f64 {
    if f1_scores.is_empty() || f1_scores.iter().any(|&f| f <= 0.0) {
        return 0.0;
    }
    f1_scores.len() as f64 / f1_scores.iter().map(|f| 1.0 / f).sum::<f64>()
}
