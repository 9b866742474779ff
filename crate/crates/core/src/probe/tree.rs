//! Depth-limited regression trees and first-order gradient boosting.

use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub(crate) nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + walk(nodes, left).max(walk(nodes, right))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Exact greedy search over midpoints of sorted unique values. Gain is the
/// reduction in squared error; ties keep the lowest feature, then the lowest
/// threshold.
fn best_split(x: &Matrix, target: &[f64], rows: &[usize], min_leaf: usize) -> Option<Candidate> {
    let n = rows.len();
    let total: f64 = rows.iter().map(|&r| target[r]).sum();
    let parent = total * total / n as f64;
    let mut best: Option<Candidate> = None;
    let mut order = rows.to_vec();
    for feature in 0..x.cols() {
        order.sort_by(|&a, &b| x.get(a, feature).total_cmp(&x.get(b, feature)).then(a.cmp(&b)));
        let mut left_sum = 0.0;
        for i in 0..n - 1 {
            left_sum += target[order[i]];
            let (v, next) = (x.get(order[i], feature), x.get(order[i + 1], feature));
            if v == next {
                continue;
            }
            let n_left = i + 1;
            let n_right = n - n_left;
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / n_left as f64 + right_sum * right_sum / n_right as f64
                - parent;
            let threshold = v + (next - v) / 2.0;
            if gain > best.as_ref().map_or(1e-12, |b| b.gain) {
                best = Some(Candidate {
                    gain,
                    feature,
                    threshold,
                });
            }
        }
    }
    best
}

pub(crate) fn fit_tree(x: &Matrix, target: &[f64], rows: &[usize], params: TreeParams) -> Tree {
    let mut nodes = Vec::new();
    grow(x, target, rows, 0, params, &mut nodes);
    Tree { nodes }
}

fn grow(
    x: &Matrix,
    target: &[f64],
    rows: &[usize],
    depth: usize,
    params: TreeParams,
    nodes: &mut Vec<TreeNode>,
) -> usize {
    let id = nodes.len();
    let mean = rows.iter().map(|&r| target[r]).sum::<f64>() / rows.len() as f64;
    nodes.push(TreeNode::Leaf { value: mean });
    if depth >= params.max_depth || rows.len() < 2 {
        return id;
    }
    let Some(split) = best_split(x, target, rows, params.min_samples_leaf.max(1)) else {
        return id;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&row| x.get(row, split.feature) <= split.threshold);
    let left = grow(x, target, &l, depth + 1, params, nodes);
    let right = grow(x, target, &r, depth + 1, params, nodes);
    nodes[id] = TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    id
}

/// An additive ensemble `base + lr * Σ tree(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Booster {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl Booster {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.base_score
            + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Loss {
    Squared,
    Logistic,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

const PROB_CLAMP: f64 = 1e-6;

/// Fits a booster and returns it with the training loss after the base score
/// and after each tree (squared error: mean; logistic: mean log-loss).
pub(crate) fn boost(
    x: &Matrix,
    y: &[f64],
    loss: Loss,
    n_trees: usize,
    learning_rate: f64,
    params: TreeParams,
) -> (Booster, Vec<f64>) {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let base_score = match loss {
        Loss::Squared => mean,
        Loss::Logistic => {
            let p = mean.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            (p / (1.0 - p)).ln()
        }
    };
    let rows: Vec<usize> = (0..n).collect();
    let mut scores = vec![base_score; n];
    let mut trees = Vec::with_capacity(n_trees);
    let mut trace = vec![training_loss(loss, y, &scores)];
    let mut residual = vec![0.0; n];
    for _ in 0..n_trees {
        for i in 0..n {
            residual[i] = match loss {
                Loss::Squared => y[i] - scores[i],
                Loss::Logistic => y[i] - sigmoid(scores[i]),
            };
        }
        let tree = fit_tree(x, &residual, &rows, params);
        for (i, s) in scores.iter_mut().enumerate() {
            *s += learning_rate * tree.predict(x.row(i));
        }
        trees.push(tree);
        trace.push(training_loss(loss, y, &scores));
    }
    (
        Booster {
            base_score,
            learning_rate,
            trees,
        },
        trace,
    )
}

pub(crate) fn training_loss(loss: Loss, y: &[f64], scores: &[f64]) -> f64 {
    let n = y.len() as f64;
    match loss {
        Loss::Squared => y.iter().zip(scores).map(|(a, s)| (a - s).powi(2)).sum::<f64>() / n,
        Loss::Logistic => {
            y.iter()
                .zip(scores)
                .map(|(a, s)| {
                    // log(1 + e^s) - a*s, computed stably
                    let softplus = if *s > 0.0 {
                        s + (-s).exp().ln_1p()
                    } else {
                        s.exp().ln_1p()
                    };
                    softplus - a * s
                })
                .sum::<f64>()
                / n
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(depth: usize) -> TreeParams {
        TreeParams {
            max_depth: depth,
            min_samples_leaf: 1,
        }
    }

    #[test]
    fn two_points_one_split() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let (b, trace) = boost(&x, &[2.0, 6.0], Loss::Squared, 1, 1.0, params(1));
        assert_eq!(b.score(&[0.0]), 2.0);
        assert_eq!(b.score(&[1.0]), 6.0);
        assert_eq!(*trace.last().unwrap(), 0.0);
        match b.trees[0].nodes()[0] {
            TreeNode::Split {
                feature, threshold, ..
            } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, 0.5);
            }
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn tie_prefers_lowest_feature() {
        // Both columns separate the targets identically.
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let t = fit_tree(&x, &[-1.0, 1.0], &[0, 1], params(1));
        assert!(matches!(t.nodes()[0], TreeNode::Split { feature: 0, .. }));
    }

    #[test]
    fn min_samples_leaf_blocks_split() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let t = fit_tree(
            &x,
            &[0.0, 0.0, 9.0],
            &[0, 1, 2],
            TreeParams {
                max_depth: 3,
                min_samples_leaf: 2,
            },
        );
        assert_eq!(t.nodes().len(), 1);
    }

    #[test]
    fn depth_limit() {
        let rows: Vec<Vec<f64>> = (0..32).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..32).map(|i| (i * i) as f64).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let t = fit_tree(&x, &y, &(0..32).collect::<Vec<_>>(), params(3));
        assert_eq!(t.depth(), 3);
    }

    #[test]
    fn sigmoid_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }
}
