//! Bootstrap-aggregated Gini trees of bounded depth with majority voting.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::table::DataTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features tried per split; `None` means `ceil(sqrt(d))`.
    pub feature_subsample: Option<usize>,
    pub bootstrap: bool,
    /// Class returned when the vote is split evenly.
    pub tie_class: u8,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 25,
            max_depth: 4,
            min_leaf: 5,
            feature_subsample: None,
            bootstrap: true,
            tie_class: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ForestNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: u8,
        /// Training-sample counts of class 0 and class 1 at this leaf.
        counts: [usize; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<ForestNode>,
}

impl DecisionTree {
    pub fn predict(&self, row: &[f64]) -> u8 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                ForestNode::Leaf { class, .. } => return *class,
                ForestNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn max_depth(&self) -> usize {
        fn walk(nodes: &[ForestNode], i: usize) -> usize {
            match &nodes[i] {
                ForestNode::Leaf { .. } => 0,
                ForestNode::Split { left, right, .. } => {
                    1 + walk(nodes, *left).max(walk(nodes, *right))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub features: Vec<String>,
    pub trees: Vec<DecisionTree>,
    pub tie_class: u8,
}

impl RandomForest {
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let ones = self.trees.iter().filter(|t| t.predict(row) == 1).count();
        let zeros = self.trees.len() - ones;
        match ones.cmp(&zeros) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => self.tie_class,
        }
    }

    pub fn predict(&self, x: &Matrix) -> Vec<u8> {
        (0..x.rows()).map(|i| self.predict_row(x.row(i))).collect()
    }
}

fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = counts[1] as f64 / n;
    2.0 * p * (1.0 - p)
}

fn majority(counts: [usize; 2], tie: u8) -> u8 {
    match counts[1].cmp(&counts[0]) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => 0,
        std::cmp::Ordering::Equal => tie,
    }
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [u8],
    cfg: &'a ForestConfig,
    n_try: usize,
    rng: ChaCha8Rng,
    nodes: Vec<ForestNode>,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> [usize; 2] {
        let ones = idx.iter().filter(|&&i| self.y[i] == 1).count();
        [idx.len() - ones, ones]
    }

    fn best_split(&mut self, idx: &[usize], parent: [usize; 2]) -> Option<(usize, f64)> {
        let d = self.x.cols();
        let mut tried: Vec<usize> = sample(&mut self.rng, d, self.n_try.min(d)).into_vec();
        tried.sort_unstable();
        let n = idx.len() as f64;
        let parent_impurity = gini(parent);
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order = idx.to_vec();
        for f in tried {
            order.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)));
            let mut left = [0usize; 2];
            for k in 0..order.len() - 1 {
                left[usize::from(self.y[order[k]])] += 1;
                let nl = k + 1;
                if nl < self.cfg.min_leaf || order.len() - nl < self.cfg.min_leaf {
                    continue;
                }
                let (v, next) = (self.x.get(order[k], f), self.x.get(order[k + 1], f));
                if v == next {
                    continue;
                }
                let right = [parent[0] - left[0], parent[1] - left[1]];
                let weighted = (nl as f64 * gini(left) + (n - nl as f64) * gini(right)) / n;
                let gain = parent_impurity - weighted;
                if gain > 1e-12 && best.is_none_or(|b| gain > b.2) {
                    best = Some((f, 0.5 * (v + next), gain));
                }
            }
        }
        best.map(|b| (b.0, b.1))
    }

    fn grow(&mut self, idx: &[usize], depth: usize) -> usize {
        let counts = self.counts(idx);
        let id = self.nodes.len();
        self.nodes.push(ForestNode::Leaf {
            class: majority(counts, self.cfg.tie_class),
            counts,
        });
        let pure = counts[0] == 0 || counts[1] == 0;
        if pure || depth >= self.cfg.max_depth || idx.len() < 2 * self.cfg.min_leaf.max(1) {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(idx, counts) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x.get(i, feature) <= threshold);
        let left = self.grow(&l, depth + 1);
        let right = self.grow(&r, depth + 1);
        self.nodes[id] = ForestNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

pub fn fit_random_forest_matrix(
    x: &Matrix,
    y: &[u8],
    features: &[String],
    cfg: &ForestConfig,
) -> Result<RandomForest> {
    let n = x.rows();
    if y.len() != n || features.len() != x.cols() {
        return Err(Error::invalid("forest inputs disagree in shape"));
    }
    let pos = y.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == n {
        return Err(Error::invalid(
            "random forest needs both classes (degenerate input)",
        ));
    }
    if cfg.n_trees == 0 || cfg.max_depth == 0 {
        return Err(Error::invalid(
            "forest needs at least one tree of depth >= 1",
        ));
    }
    if !x.all_finite() {
        return Err(Error::invalid("forest inputs must be finite"));
    }
    let d = x.cols();
    let n_try = cfg
        .feature_subsample
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d.max(1));
    let mut seeder = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trees = Vec::with_capacity(cfg.n_trees);
    for _ in 0..cfg.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(seeder.random());
        let idx: Vec<usize> = if cfg.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let mut b = Builder {
            x,
            y,
            cfg,
            n_try,
            rng,
            nodes: Vec::new(),
        };
        b.grow(&idx, 0);
        trees.push(DecisionTree { nodes: b.nodes });
    }
    Ok(RandomForest {
        features: features.to_vec(),
        trees,
        tie_class: cfg.tie_class,
    })
}

pub fn fit_random_forest(table: &DataTable, cfg: &ForestConfig) -> Result<RandomForest> {
    fit_random_forest_matrix(
        &table.feature_matrix()?,
        &table.labels()?,
        &table.feature_names(),
        cfg,
    )
}
