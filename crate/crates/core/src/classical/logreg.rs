//! Multinomial logistic regression trained by full-batch gradient descent on
//! mean cross-entropy plus `(l2 / 2) * ||W||^2`. Weights start at zero, so the
//! fit does not depend on the seed.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{check_training_data, distinct_classes, ModelError, TrainConfig};
use crate::linalg::{argmax, dot, softmax, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxRegression {
    /// `n_classes x n_features`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
    /// Objective value before each epoch, plus the final value.
    pub loss_history: Vec<f64>,
}

impl SoftmaxRegression {
    pub fn zeros(n_classes: usize, n_features: usize) -> Self {
        Self { weights: Matrix::zeros(n_classes, n_features), bias: vec![0.0; n_classes], loss_history: Vec::new() }
    }

    pub fn n_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn logits(&self, row: &[f64]) -> Vec<f64> {
        (0..self.n_classes()).map(|c| dot(self.weights.row(c), row) + self.bias[c]).collect()
    }

    pub fn probabilities(&self, row: &[f64]) -> Vec<f64> {
        softmax(&self.logits(row))
    }

    pub fn predict(&self, x: &Matrix) -> Vec<usize> {
        x.iter_rows().map(|r| argmax(&self.logits(r)).unwrap_or(0)).collect()
    }

    /// Objective and its gradient with respect to weights and bias.
    pub fn loss_and_gradient(&self, x: &Matrix, y: &[usize], l2: f64) -> (f64, Matrix, Vec<f64>) {
        let k = self.n_classes();
        let n = x.rows() as f64;
        let mut grad_w = Matrix::zeros(k, x.cols());
        let mut grad_b = vec![0.0; k];
        let mut loss = 0.0;
        for (row, &label) in x.iter_rows().zip(y) {
            let p = self.probabilities(row);
            loss -= libm::log(p[label].max(f64::MIN_POSITIVE));
            for c in 0..k {
                let delta = (p[c] - if c == label { 1.0 } else { 0.0 }) / n;
                grad_b[c] += delta;
                if delta != 0.0 {
                    for (g, &v) in grad_w.row_mut(c).iter_mut().zip(row) {
                        *g += delta * v;
                    }
                }
            }
        }
        loss /= n;
        let penalty: f64 = self.weights.data().iter().map(|w| w * w).sum();
        loss += 0.5 * l2 * penalty;
        for (g, &w) in grad_w.data_mut().iter_mut().zip(self.weights.data()) {
            *g += l2 * w;
        }
        (loss, grad_w, grad_b)
    }
}

/// Fits the model; also returns the per-epoch objective trace.
pub fn fit_logistic_regression(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    config: &TrainConfig,
) -> Result<(SoftmaxRegression, Vec<f64>), ModelError> {
    check_training_data(x, y, n_classes)?;
    if distinct_classes(y) < 2 {
        return Err(ModelError::DegenerateLabels);
    }
    let mut model = SoftmaxRegression::zeros(n_classes, x.cols());
    let mut history = Vec::with_capacity(config.epochs + 1);
    for _ in 0..config.epochs {
        let (loss, grad_w, grad_b) = model.loss_and_gradient(x, y, config.l2_penalty);
        history.push(loss);
        for (w, g) in model.weights.data_mut().iter_mut().zip(grad_w.data()) {
            *w -= config.learning_rate * g;
        }
        for (b, g) in model.bias.iter_mut().zip(&grad_b) {
            *b -= config.learning_rate * g;
        }
    }
    history.push(model.loss_and_gradient(x, y, config.l2_penalty).0);
    model.loss_history = history.clone();
    Ok((model, history))
}
