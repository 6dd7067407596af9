use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{majority, ModelError};
use crate::linalg::{squared_distance, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub train: Matrix,
    pub labels: Vec<usize>,
    pub k: usize,
    pub n_classes: usize,
}

impl KnnModel {
    pub fn predict(&self, queries: &Matrix) -> Result<Vec<usize>, ModelError> {
        knn_classify(&self.train, &self.labels, self.n_classes, queries, self.k)
    }
}

/// Majority label among the `k` nearest training rows (Euclidean). Equal
/// distances favour the lower row index, equal votes the lower class index.
pub fn knn_classify(
    train: &Matrix,
    train_labels: &[usize],
    n_classes: usize,
    queries: &Matrix,
    k: usize,
) -> Result<Vec<usize>, ModelError> {
    if train.rows() == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    if k == 0 || k > train.rows() {
        return Err(ModelError::TooManyNeighbors { k, n_train: train.rows() });
    }
    if queries.rows() > 0 && queries.cols() != train.cols() {
        return Err(ModelError::Dimension { expected: train.cols(), found: queries.cols() });
    }
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(train.rows());
    let mut out = Vec::with_capacity(queries.rows());
    for q in queries.iter_rows() {
        order.clear();
        order.extend(train.iter_rows().enumerate().map(|(i, row)| (squared_distance(q, row), i)));
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < order.len() {
            order.select_nth_unstable_by(k - 1, by_distance);
        }
        let mut votes = vec![0usize; n_classes];
        for &(_, i) in &order[..k] {
            votes[train_labels[i]] += 1;
        }
        out.push(majority(&votes));
    }
    Ok(out)
}
