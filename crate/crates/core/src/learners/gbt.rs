//! Second-order gradient boosting of depth-limited regression trees on the
//! logistic loss. Leaf values are Newton steps `-G / (H + l2)`; split gain is
//! the usual `(G_L^2/(H_L+l2) + G_R^2/(H_R+l2) - G^2/(H+l2)) / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{normalize_to_unit_sum, sigmoid, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
    pub l2: f64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        Self {
            n_trees: 50,
            max_depth: 3,
            learning_rate: 0.1,
            min_leaf: 5,
            l2: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        gain: f64,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    idx = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + walk(nodes, *left).max(walk(nodes, *right))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
    /// Total split gain per feature.
    pub gain: Vec<f64>,
    /// Gain normalized to sum 1 (uniform when no split was made).
    pub importances: Vec<f64>,
    /// Training log-loss before the first tree and after each round.
    pub train_log_loss: Vec<f64>,
}

impl GbtModel {
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.base_score
            + self.learning_rate * self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }

    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows()).map(|i| self.predict_row(x.row(i))).collect()
    }

    pub fn n_features(&self) -> usize {
        self.gain.len()
    }
}

fn log_loss(margins: &[f64], y: &[u8]) -> f64 {
    // ln(1 + e^m) - y m, written stably.
    let total: f64 = margins
        .iter()
        .zip(y)
        .map(|(&m, &l)| {
            let softplus = if m > 0.0 {
                m + (-m).exp().ln_1p()
            } else {
                m.exp().ln_1p()
            };
            softplus - f64::from(l) * m
        })
        .sum();
    total / margins.len() as f64
}

struct Grower<'a> {
    x: &'a Matrix,
    grad: &'a [f64],
    hess: &'a [f64],
    y: &'a [u8],
    cfg: &'a GbtConfig,
    nodes: Vec<TreeNode>,
    gain: &'a mut [f64],
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Grower<'_> {
    fn leaf_value(&self, idx: &[usize]) -> f64 {
        let g: f64 = idx.iter().map(|&i| self.grad[i]).sum();
        let h: f64 = idx.iter().map(|&i| self.hess[i]).sum();
        -g / (h + self.cfg.l2)
    }

    fn best_split(&self, idx: &[usize]) -> Option<BestSplit> {
        let l2 = self.cfg.l2;
        let g_total: f64 = idx.iter().map(|&i| self.grad[i]).sum();
        let h_total: f64 = idx.iter().map(|&i| self.hess[i]).sum();
        let parent = g_total * g_total / (h_total + l2);
        let mut best: Option<BestSplit> = None;
        let mut order = idx.to_vec();
        for f in 0..self.x.cols() {
            order.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)));
            let (mut gl, mut hl) = (0.0, 0.0);
            for k in 0..order.len() - 1 {
                let i = order[k];
                gl += self.grad[i];
                hl += self.hess[i];
                let left_n = k + 1;
                if left_n < self.cfg.min_leaf || order.len() - left_n < self.cfg.min_leaf {
                    continue;
                }
                let (v, next) = (self.x.get(i, f), self.x.get(order[k + 1], f));
                if v == next {
                    continue;
                }
                let (gr, hr) = (g_total - gl, h_total - hl);
                let gain = 0.5 * (gl * gl / (hl + l2) + gr * gr / (hr + l2) - parent);
                if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(BestSplit {
                        feature: f,
                        threshold: 0.5 * (v + next),
                        gain,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: &[usize], depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            value: self.leaf_value(idx),
        });
        let pure = idx.iter().all(|&i| self.y[i] == self.y[idx[0]]);
        if depth >= self.cfg.max_depth || pure || idx.len() < 2 * self.cfg.min_leaf.max(1) {
            return id;
        }
        let Some(split) = self.best_split(idx) else {
            return id;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x.get(i, split.feature) <= split.threshold);
        self.gain[split.feature] += split.gain;
        let left = self.grow(&left_idx, depth + 1);
        let right = self.grow(&right_idx, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            gain: split.gain,
        };
        id
    }
}

pub fn fit_gbt(x: &Matrix, y: &[u8], cfg: &GbtConfig) -> Result<GbtModel> {
    let n = x.rows();
    if y.len() != n {
        return Err(Error::invalid("label count differs from row count"));
    }
    let pos = y.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == n {
        return Err(Error::invalid(
            "gradient boosting needs both classes (degenerate input)",
        ));
    }
    if !x.all_finite() {
        return Err(Error::invalid("gradient boosting inputs must be finite"));
    }
    let prior = pos as f64 / n as f64;
    let base_score = (prior / (1.0 - prior)).ln();
    let mut margins = vec![base_score; n];
    let mut gain = vec![0.0; x.cols()];
    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut train_log_loss = vec![log_loss(&margins, y)];
    let all: Vec<usize> = (0..n).collect();
    for _ in 0..cfg.n_trees {
        let p: Vec<f64> = margins.iter().map(|&m| sigmoid(m)).collect();
        let grad: Vec<f64> = p.iter().zip(y).map(|(&pi, &l)| pi - f64::from(l)).collect();
        let hess: Vec<f64> = p.iter().map(|&pi| (pi * (1.0 - pi)).max(1e-16)).collect();
        let mut grower = Grower {
            x,
            grad: &grad,
            hess: &hess,
            y,
            cfg,
            nodes: Vec::new(),
            gain: &mut gain,
        };
        grower.grow(&all, 0);
        let tree = RegressionTree {
            nodes: grower.nodes,
        };
        for (i, m) in margins.iter_mut().enumerate() {
            *m += cfg.learning_rate * tree.predict(x.row(i));
        }
        train_log_loss.push(log_loss(&margins, y));
        trees.push(tree);
    }
    Ok(GbtModel {
        base_score,
        learning_rate: cfg.learning_rate,
        trees,
        importances: normalize_to_unit_sum(&gain),
        gain,
        train_log_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn separable(n: usize, seed: u64) -> (Matrix, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = u8::from(i % 2 == 0);
            let signal = if label == 1 {
                rng.random_range(0.6..1.0)
            } else {
                rng.random_range(0.0..0.4)
            };
            rows.push(vec![
                rng.random::<f64>(),
                signal,
                rng.random::<f64>(),
                rng.random::<f64>(),
            ]);
            y.push(label);
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn separating_feature_dominates_importance() {
        let (x, y) = separable(200, 1);
        let m = fit_gbt(&x, &y, &GbtConfig::default()).unwrap();
        assert!(m.importances[1] >= 0.9, "{:?}", m.importances);
        let p = m.predict_proba(&x);
        assert!(p.iter().zip(&y).all(|(&pi, &l)| (pi >= 0.5) == (l == 1)));
    }

    #[test]
    fn zero_trees_is_the_prior() {
        let (x, y) = separable(40, 2);
        let cfg = GbtConfig {
            n_trees: 0,
            ..GbtConfig::default()
        };
        let m = fit_gbt(&x, &y, &cfg).unwrap();
        assert_eq!(m.importances, vec![0.25; 4]);
        assert_eq!(m.margin(x.row(0)), 0.0, "balanced prior has zero log-odds");
    }

    #[test]
    fn pure_node_does_not_split() {
        let (x, _) = separable(40, 3);
        let mut y = vec![0u8; 40];
        y[0] = 1;
        y[1] = 1;
        let cfg = GbtConfig {
            n_trees: 1,
            min_leaf: 1,
            ..GbtConfig::default()
        };
        let m = fit_gbt(&x, &y, &cfg).unwrap();
        // Every leaf holds rows of a single class or sits at max depth.
        let tree = &m.trees[0];
        assert!(tree.depth() <= 3);
        fn check(
            tree: &RegressionTree,
            x: &Matrix,
            y: &[u8],
            node: usize,
            idx: Vec<usize>,
            depth: usize,
        ) {
            match &tree.nodes[node] {
                TreeNode::Leaf { .. } => {}
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    assert!(
                        !idx.iter().all(|&i| y[i] == y[idx[0]]),
                        "split on a pure node"
                    );
                    let (l, r): (Vec<usize>, Vec<usize>) =
                        idx.iter().partition(|&&i| x.get(i, *feature) <= *threshold);
                    check(tree, x, y, *left, l, depth + 1);
                    check(tree, x, y, *right, r, depth + 1);
                }
            }
        }
        check(tree, &x, &y, 0, (0..40).collect(), 0);
    }

    #[test]
    fn log_loss_never_increases() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<Vec<f64>> = (0..150)
                .map(|_| (0..3).map(|_| rng.random()).collect())
                .collect();
            let y: Vec<u8> = rows
                .iter()
                .map(|r| u8::from(r[0] + 0.3 * rng.random::<f64>() > 0.6))
                .collect();
            let m = fit_gbt(
                &Matrix::from_rows(&rows).unwrap(),
                &y,
                &GbtConfig::default(),
            )
            .unwrap();
            assert!(
                m.train_log_loss.windows(2).all(|w| w[1] <= w[0] + 1e-12),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let (x, _) = separable(10, 4);
        assert!(fit_gbt(&x, &[1; 10], &GbtConfig::default()).is_err());
    }
}
