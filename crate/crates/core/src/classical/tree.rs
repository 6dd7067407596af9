//! Entropy-based decision trees.
//!
//! Candidate thresholds are midpoints between consecutive distinct values of a
//! feature; samples with `value <= threshold` go left. The split with the largest
//! information gain wins, ties going to the lower feature index and then the
//! lower threshold.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{check_training_data, majority, ModelError, TrainConfig};
use crate::linalg::Matrix;

const GAIN_EPSILON: f64 = 1e-12;

/// Shannon entropy in bits of a class-count vector.
pub fn entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * libm::log2(p)
        })
        .sum()
}

fn label_counts<T: Ord>(labels: &[T]) -> BTreeMap<&T, usize> {
    let mut counts = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    counts
}

/// `H(parent) - sum(|cell| / |parent| * H(cell))` in bits.
pub fn information_gain<T: Ord>(parent: &[T], partition: &[&[T]]) -> Result<f64, ModelError> {
    if parent.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let parent_counts = label_counts(parent);
    let mut union: BTreeMap<&T, usize> = BTreeMap::new();
    for cell in partition {
        for l in cell.iter() {
            *union.entry(l).or_insert(0) += 1;
        }
    }
    if union != parent_counts {
        return Err(ModelError::InvalidPartition);
    }
    let n = parent.len() as f64;
    let h = |counts: BTreeMap<&T, usize>| entropy(&counts.into_values().collect::<Vec<_>>());
    let children: f64 =
        partition.iter().filter(|c| !c.is_empty()).map(|c| c.len() as f64 / n * h(label_counts(c))).sum();
    Ok(h(parent_counts) - children)
}

fn split_gain(parent: &[usize], left: &[usize], right: &[usize]) -> f64 {
    let n = parent.iter().sum::<usize>() as f64;
    let nl = left.iter().sum::<usize>() as f64;
    let nr = right.iter().sum::<usize>() as f64;
    entropy(parent) - nl / n * entropy(left) - nr / n * entropy(right)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf { counts: Vec<usize> },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Node 0 is the root.
    pub nodes: Vec<TreeNode>,
    pub n_classes: usize,
    pub n_features: usize,
}

impl DecisionTree {
    pub fn leaf_counts(&self, row: &[f64]) -> &[usize] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { counts } => return counts,
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        majority(self.leaf_counts(row))
    }

    pub fn predict(&self, x: &Matrix) -> Vec<usize> {
        x.iter_rows().map(|r| self.predict_row(r)).collect()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

pub(crate) struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub n_classes: usize,
}

struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

fn best_split(x: &Matrix, y: &[usize], samples: &[usize], features: &[usize], n_classes: usize) -> Option<Best> {
    let mut parent = vec![0usize; n_classes];
    for &i in samples {
        parent[y[i]] += 1;
    }
    let mut best: Option<Best> = None;
    let mut column: Vec<(f64, usize)> = Vec::with_capacity(samples.len());
    for &feature in features {
        column.clear();
        column.extend(samples.iter().map(|&i| (x.get(i, feature), y[i])));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = vec![0usize; n_classes];
        let mut right = parent.clone();
        for w in 0..column.len().saturating_sub(1) {
            let (value, label) = column[w];
            left[label] += 1;
            right[label] -= 1;
            let next = column[w + 1].0;
            if next <= value {
                continue;
            }
            let gain = split_gain(&parent, &left, &right);
            if best.as_ref().is_none_or(|b| gain > b.gain + GAIN_EPSILON) {
                best = Some(Best { gain, feature, threshold: value + (next - value) / 2.0 });
            }
        }
    }
    best
}

/// Greedy top-down induction on `samples`. `pick_features` chooses the candidate
/// features (ascending) for each node.
pub(crate) fn grow_tree(
    x: &Matrix,
    y: &[usize],
    samples: Vec<usize>,
    params: &TreeParams,
    pick_features: &mut dyn FnMut() -> Vec<usize>,
) -> DecisionTree {
    let mut nodes: Vec<TreeNode> = Vec::new();
    // (node slot, samples, depth)
    let mut stack = vec![(0usize, samples, 0usize)];
    nodes.push(TreeNode::Leaf { counts: Vec::new() });
    while let Some((slot, samples, depth)) = stack.pop() {
        let mut counts = vec![0usize; params.n_classes];
        for &i in &samples {
            counts[y[i]] += 1;
        }
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_reached = params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || samples.len() < params.min_leaf {
            nodes[slot] = TreeNode::Leaf { counts };
            continue;
        }
        let features = pick_features();
        match best_split(x, y, &samples, &features, params.n_classes) {
            Some(best) if best.gain > GAIN_EPSILON => {
                let (left, right): (Vec<usize>, Vec<usize>) =
                    samples.iter().partition(|&&i| x.get(i, best.feature) <= best.threshold);
                let l = nodes.len();
                nodes.push(TreeNode::Leaf { counts: Vec::new() });
                let r = nodes.len();
                nodes.push(TreeNode::Leaf { counts: Vec::new() });
                nodes[slot] = TreeNode::Split { feature: best.feature, threshold: best.threshold, left: l, right: r };
                stack.push((r, right, depth + 1));
                stack.push((l, left, depth + 1));
            }
            _ => nodes[slot] = TreeNode::Leaf { counts },
        }
    }
    DecisionTree { nodes, n_classes: params.n_classes, n_features: x.cols() }
}

pub fn fit_decision_tree(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    config: &TrainConfig,
) -> Result<DecisionTree, ModelError> {
    check_training_data(x, y, n_classes)?;
    let params = TreeParams { max_depth: config.max_depth, min_leaf: config.min_leaf, n_classes };
    let all: Vec<usize> = (0..x.cols()).collect();
    Ok(grow_tree(x, y, (0..x.rows()).collect(), &params, &mut || all.clone()))
}
