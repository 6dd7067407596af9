//! One-vs-rest linear SVM. Each binary problem minimizes
//! `lambda/2 * ||w||^2 + mean(hinge)` with `lambda = 1 / (C * n)` by full-batch
//! subgradient steps of size `1 / (lambda * t)` in epoch `t`. The bias is
//! learned as the weight of a constant input.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{check_training_data, distinct_classes, ModelError, TrainConfig};
use crate::linalg::{argmax, dot, Matrix};

/// Mean of `max(0, 1 - margin)`.
pub fn hinge_loss(margins: &[f64]) -> f64 {
    if margins.is_empty() {
        return 0.0;
    }
    margins.iter().map(|m| (1.0 - m).max(0.0)).sum::<f64>() / margins.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    /// `n_classes x n_features`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl LinearSvm {
    pub fn decision_values(&self, row: &[f64]) -> Vec<f64> {
        (0..self.bias.len()).map(|c| dot(self.weights.row(c), row) + self.bias[c]).collect()
    }

    pub fn predict(&self, x: &Matrix) -> Vec<usize> {
        x.iter_rows().map(|r| argmax(&self.decision_values(r)).unwrap_or(0)).collect()
    }
}

fn train_binary(x: &Matrix, signs: &[f64], lambda: f64, epochs: usize) -> (Vec<f64>, f64) {
    let n = x.rows() as f64;
    let mut w = vec![0.0; x.cols()];
    let mut b = 0.0;
    let mut step_w = vec![0.0; x.cols()];
    for t in 1..=epochs {
        let eta = 1.0 / (lambda * t as f64);
        step_w.iter_mut().for_each(|s| *s = 0.0);
        let mut step_b = 0.0;
        for (row, &s) in x.iter_rows().zip(signs) {
            if s * (dot(&w, row) + b) < 1.0 {
                for (acc, &v) in step_w.iter_mut().zip(row) {
                    *acc += s * v;
                }
                step_b += s;
            }
        }
        let shrink = 1.0 - eta * lambda;
        for (wi, &si) in w.iter_mut().zip(&step_w) {
            *wi = shrink * *wi + eta * si / n;
        }
        b = shrink * b + eta * step_b / n;
    }
    (w, b)
}

pub fn fit_linear_svm(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    config: &TrainConfig,
) -> Result<LinearSvm, ModelError> {
    check_training_data(x, y, n_classes)?;
    if distinct_classes(y) < 2 {
        return Err(ModelError::DegenerateLabels);
    }
    let lambda = 1.0 / (config.svm_c * x.rows() as f64);
    let mut weights = Matrix::zeros(n_classes, x.cols());
    let mut bias = vec![0.0; n_classes];
    for (c, slot) in bias.iter_mut().enumerate() {
        let signs: Vec<f64> = y.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
        let (w, b) = train_binary(x, &signs, lambda, config.epochs);
        weights.row_mut(c).copy_from_slice(&w);
        *slot = b;
    }
    Ok(LinearSvm { weights, bias })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::Algorithm;

    #[test]
    fn hinge_is_zero_beyond_margin() {
        assert_eq!(hinge_loss(&[1.0, 2.5, 10.0]), 0.0);
        assert_eq!(hinge_loss(&[0.0, 2.0]), 0.5);
    }

    #[test]
    fn separable_two_class() {
        let x = Matrix::from_rows(
            &[vec![2.0, 1.0], vec![1.5, 2.0], vec![3.0, 0.5], vec![-1.0, -2.0], vec![-2.0, -0.5], vec![-1.5, -1.5]],
            2,
        )
        .unwrap();
        let y = [0, 0, 0, 1, 1, 1];
        let svm = fit_linear_svm(&x, &y, 2, &TrainConfig::for_algorithm(Algorithm::Svm)).unwrap();
        assert_eq!(svm.predict(&x), y);
    }

    #[test]
    fn scaling_keeps_argmax() {
        let x = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]], 2).unwrap();
        let svm = fit_linear_svm(&x, &[0, 1, 2], 3, &TrainConfig::for_algorithm(Algorithm::Svm)).unwrap();
        let mut scaled = svm.clone();
        scaled.weights.data_mut().iter_mut().for_each(|w| *w *= 3.7);
        scaled.bias.iter_mut().for_each(|b| *b *= 3.7);
        assert_eq!(svm.predict(&x), scaled.predict(&x));
    }

    #[test]
    fn single_class_rejected() {
        let x = Matrix::zeros(2, 2);
        assert_eq!(
            fit_linear_svm(&x, &[0, 0], 2, &TrainConfig::for_algorithm(Algorithm::Svm)),
            Err(ModelError::DegenerateLabels)
        );
    }
}
