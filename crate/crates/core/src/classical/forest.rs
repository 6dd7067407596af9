use alloc::vec;
use alloc::vec::Vec;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow_tree, TreeParams};
use super::{check_training_data, majority, DecisionTree, FeaturesPerSplit, ModelError, TrainConfig};
use crate::linalg::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    /// Master seed; tree `t` used random stream `t` of it.
    pub seed: u64,
    pub tree_streams: Vec<u64>,
    pub n_classes: usize,
}

impl RandomForest {
    pub fn votes(&self, row: &[f64]) -> Vec<usize> {
        let mut votes = vec![0usize; self.n_classes];
        for tree in &self.trees {
            votes[tree.predict_row(row)] += 1;
        }
        votes
    }

    pub fn predict(&self, x: &Matrix) -> Vec<usize> {
        x.iter_rows().map(|r| majority(&self.votes(r))).collect()
    }
}

/// Trains one tree from its own random stream, so trees are independent of
/// the order in which they are built.
pub fn fit_forest_tree(x: &Matrix, y: &[usize], n_classes: usize, config: &TrainConfig, index: u64) -> DecisionTree {
    let mut rng = rng::stream(config.seed, index);
    let n = x.rows();
    let samples: Vec<usize> =
        if config.bootstrap { (0..n).map(|_| rng.gen_range(0..n)).collect() } else { (0..n).collect() };
    let params = TreeParams { max_depth: config.max_depth, min_leaf: config.min_leaf, n_classes };
    let n_features = x.cols();
    let per_split = config.features_per_split.count(n_features);
    let all: Vec<usize> = (0..n_features).collect();
    let mut pick = || -> Vec<usize> {
        if config.features_per_split == FeaturesPerSplit::All || per_split >= n_features {
            all.clone()
        } else {
            let mut chosen = sample(&mut rng, n_features, per_split).into_vec();
            chosen.sort_unstable();
            chosen
        }
    };
    grow_tree(x, y, samples, &params, &mut pick)
}

pub fn fit_random_forest(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    config: &TrainConfig,
) -> Result<RandomForest, ModelError> {
    check_training_data(x, y, n_classes)?;
    if config.n_trees == 0 {
        return Err(ModelError::InvalidConfig("n_trees must be >= 1".into()));
    }
    let tree_streams: Vec<u64> = (0..config.n_trees as u64).collect();
    let trees = tree_streams.iter().map(|&t| fit_forest_tree(x, y, n_classes, config, t)).collect();
    Ok(RandomForest { trees, seed: config.seed, tree_streams, n_classes })
}
