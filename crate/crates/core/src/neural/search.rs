//! Sequential model-based hyperparameter search. Candidates are the full grid
//! of the search space, encoded numerically; a Gaussian-process surrogate with
//! a squared-exponential kernel ranks unevaluated candidates by expected
//! improvement in mean cross-validated AUC.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use super::network::{forward, init_custom, Activation, NetworkSpec, Optimizer};
use super::train::train;
use crate::error::{Error, Result};
use crate::evaluation::roc_auc;
use crate::matrix::Matrix;
use crate::table::stratified_kfold_labels;

const WARM_START: usize = 5;
const LENGTH_SCALE: f64 = 1.0;
const NOISE: f64 = 1e-6;
const XI: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStrategy {
    Bayesian,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpace {
    pub hidden_layers: Vec<usize>,
    pub widths: Vec<usize>,
    pub activations: Vec<Activation>,
    pub optimizers: Vec<Optimizer>,
    pub learning_rates: Vec<f64>,
    pub batch_sizes: Vec<usize>,
    pub epochs: Vec<usize>,
    pub budget: usize,
    pub folds: usize,
    pub strategy: SearchStrategy,
    pub seed: u64,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            hidden_layers: vec![1, 2, 3],
            widths: vec![8, 16, 32],
            activations: vec![Activation::Relu, Activation::Tanh],
            optimizers: vec![Optimizer::Sgd, Optimizer::Momentum, Optimizer::Adaptive],
            learning_rates: vec![0.1, 0.01, 0.001],
            batch_sizes: vec![32, 128],
            epochs: vec![50, 200],
            budget: 15,
            folds: 3,
            strategy: SearchStrategy::Bayesian,
            seed: 0,
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        let empty = self.hidden_layers.is_empty()
            || self.widths.is_empty()
            || self.activations.is_empty()
            || self.optimizers.is_empty()
            || self.learning_rates.is_empty()
            || self.batch_sizes.is_empty()
            || self.epochs.is_empty();
        if empty {
            return Err(Error::invalid(
                "every search dimension needs at least one candidate",
            ));
        }
        if self.budget == 0 {
            return Err(Error::invalid("search budget must be at least 1"));
        }
        if self.folds < 2 {
            return Err(Error::invalid("cross-validation needs at least 2 folds"));
        }
        if self.hidden_layers.contains(&0)
            || self.widths.contains(&0)
            || self.batch_sizes.contains(&0)
        {
            return Err(Error::invalid(
                "layer counts, widths and batch sizes must be positive",
            ));
        }
        if self
            .learning_rates
            .iter()
            .any(|&lr| !(lr > 0.0 && lr.is_finite()))
        {
            return Err(Error::invalid("learning rates must be positive"));
        }
        Ok(())
    }

    /// Every combination, in a fixed nested order.
    pub fn candidates(&self) -> Vec<Candidate> {
        let mut out = Vec::new();
        for &hidden_layers in &self.hidden_layers {
            for &width in &self.widths {
                for &activation in &self.activations {
                    for &optimizer in &self.optimizers {
                        for &learning_rate in &self.learning_rates {
                            for &batch_size in &self.batch_sizes {
                                for &epochs in &self.epochs {
                                    out.push(Candidate {
                                        hidden_layers,
                                        width,
                                        activation,
                                        optimizer,
                                        learning_rate,
                                        batch_size,
                                        epochs,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn contains(&self, c: &Candidate) -> bool {
        self.hidden_layers.contains(&c.hidden_layers)
            && self.widths.contains(&c.width)
            && self.activations.contains(&c.activation)
            && self.optimizers.contains(&c.optimizer)
            && self.learning_rates.contains(&c.learning_rate)
            && self.batch_sizes.contains(&c.batch_size)
            && self.epochs.contains(&c.epochs)
    }

    fn encode(&self, c: &Candidate) -> Vec<f64> {
        fn scaled(values: &[f64], v: f64) -> f64 {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                (v - lo) / (hi - lo)
            } else {
                0.0
            }
        }
        let log = |xs: &[usize]| xs.iter().map(|&v| (v as f64).ln()).collect::<Vec<_>>();
        let layers: Vec<f64> = self.hidden_layers.iter().map(|&v| v as f64).collect();
        let lrs: Vec<f64> = self.learning_rates.iter().map(|v| v.ln()).collect();
        let mut out = vec![
            scaled(&layers, c.hidden_layers as f64),
            scaled(&log(&self.widths), (c.width as f64).ln()),
            scaled(&lrs, c.learning_rate.ln()),
            scaled(&log(&self.batch_sizes), (c.batch_size as f64).ln()),
            scaled(&log(&self.epochs), (c.epochs as f64).ln()),
        ];
        out.extend(
            self.activations
                .iter()
                .map(|&a| f64::from(u8::from(a == c.activation))),
        );
        out.extend(
            self.optimizers
                .iter()
                .map(|&o| f64::from(u8::from(o == c.optimizer))),
        );
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub hidden_layers: usize,
    pub width: usize,
    pub activation: Activation,
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Candidate {
    pub fn to_spec(&self, inputs: usize, seed: u64) -> NetworkSpec {
        let mut layer_sizes = vec![inputs];
        layer_sizes.extend(std::iter::repeat_n(self.width, self.hidden_layers));
        layer_sizes.push(1);
        NetworkSpec {
            layer_sizes,
            activation: self.activation,
            optimizer: self.optimizer,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.epochs,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub candidate: Candidate,
    /// `None` when training diverged on some fold.
    pub cv_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: Candidate,
    pub spec: NetworkSpec,
    pub cv_auc: f64,
    pub evaluations: Vec<Evaluation>,
}

/// Mean holdout AUC of `spec` over stratified folds. Divergence on any fold
/// yields `Ok(None)`.
pub fn cv_auc(
    spec: &NetworkSpec,
    importance: &[u32],
    x: &Matrix,
    y: &[u8],
    k: usize,
    seed: u64,
) -> Result<Option<f64>> {
    let folds = stratified_kfold_labels(y, k, seed)?;
    let mut total = 0.0;
    for fold in &folds {
        let xt = x.select_rows(&fold.train);
        let yt: Vec<u8> = fold.train.iter().map(|&i| y[i]).collect();
        let params = match train(spec, init_custom(spec, importance)?, &xt, &yt) {
            Ok(p) => p,
            Err(Error::Divergence { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let yh: Vec<u8> = fold.holdout.iter().map(|&i| y[i]).collect();
        let p = forward(&params, &x.select_rows(&fold.holdout));
        total += roc_auc(&p, &yh)?.auc;
    }
    Ok(Some(total / folds.len() as f64))
}

fn kernel(a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-d2 / (2.0 * LENGTH_SCALE * LENGTH_SCALE)).exp()
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Index (into `pool`) of the pool point with the largest expected
/// improvement; ties go to the earliest.
fn propose(observed: &[(Vec<f64>, f64)], pool: &[Vec<f64>]) -> usize {
    let n = observed.len();
    let ys: Vec<f64> = observed.iter().map(|o| o.1).collect();
    let mu_y = ys.iter().sum::<f64>() / n as f64;
    let sd = (ys.iter().map(|y| (y - mu_y).powi(2)).sum::<f64>() / n as f64).sqrt();
    let sd = if sd > 0.0 { sd } else { 1.0 };
    let z = DVector::from_iterator(n, ys.iter().map(|y| (y - mu_y) / sd));
    let best = z.max();
    let mut jitter = NOISE;
    let chol = loop {
        let k = DMatrix::from_fn(n, n, |i, j| {
            kernel(&observed[i].0, &observed[j].0) + if i == j { jitter } else { 0.0 }
        });
        if let Some(c) = k.cholesky() {
            break c;
        }
        jitter *= 10.0;
    };
    let alpha = chol.solve(&z);
    let mut best_idx = 0;
    let mut best_ei = f64::NEG_INFINITY;
    for (idx, p) in pool.iter().enumerate() {
        let ks = DVector::from_iterator(n, observed.iter().map(|o| kernel(&o.0, p)));
        let mean = ks.dot(&alpha);
        let v = chol
            .l()
            .solve_lower_triangular(&ks)
            .expect("triangular solve");
        let sigma = (1.0 - v.dot(&v)).max(0.0).sqrt();
        let gap = mean - best - XI;
        let ei = if sigma > 1e-12 {
            let u = gap / sigma;
            gap * std_normal_cdf(u) + sigma * std_normal_pdf(u)
        } else {
            gap.max(0.0)
        };
        if ei > best_ei {
            best_ei = ei;
            best_idx = idx;
        }
    }
    best_idx
}

/// Evaluates up to `space.budget` candidates by mean CV AUC and returns the
/// best one seen (ties to the earliest evaluated).
pub fn hyperparameter_search(
    space: &SearchSpace,
    x: &Matrix,
    y: &[u8],
    importance: &[u32],
) -> Result<SearchResult> {
    space.validate()?;
    let grid = space.candidates();
    let encoded: Vec<Vec<f64>> = grid.iter().map(|c| space.encode(c)).collect();
    let budget = space.budget.min(grid.len());
    let mut rng = ChaCha8Rng::seed_from_u64(space.seed);
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.shuffle(&mut rng);
    let warm = match space.strategy {
        SearchStrategy::Bayesian => WARM_START.min(budget),
        SearchStrategy::Random => budget,
    };
    let mut pending: Vec<usize> = order[warm..].to_vec();
    pending.sort_unstable();
    let mut queue: Vec<usize> = order[..warm].to_vec();
    queue.reverse();

    let mut evaluations = Vec::with_capacity(budget);
    let mut observed: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for step in 0..budget {
        let idx = if let Some(i) = queue.pop() {
            i
        } else if observed.is_empty() {
            pending.remove(0)
        } else {
            let pool: Vec<Vec<f64>> = pending.iter().map(|&i| encoded[i].clone()).collect();
            pending.remove(propose(&observed, &pool))
        };
        let spec = grid[idx].to_spec(x.cols(), space.seed);
        let score = cv_auc(&spec, importance, x, y, space.folds, space.seed)?;
        if let Some(s) = score {
            observed.push((encoded[idx].clone(), s));
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((step, s));
            }
        }
        evaluations.push(Evaluation {
            candidate: grid[idx],
            cv_auc: score,
        });
    }
    let (step, cv_auc) = best.ok_or(Error::SearchExhausted)?;
    let best = evaluations[step].candidate;
    Ok(SearchResult {
        best,
        spec: best.to_spec(x.cols(), space.seed),
        cv_auc,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn toy(n: usize, seed: u64) -> (Matrix, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let l = u8::from(i % 2 == 0);
            let c = if l == 1 { 0.8 } else { -0.8 };
            rows.push(vec![
                c + rng.random_range(-0.6..0.6),
                rng.random_range(-1.0..1.0),
            ]);
            y.push(l);
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    fn tiny_space() -> SearchSpace {
        SearchSpace {
            hidden_layers: vec![1],
            widths: vec![4],
            activations: vec![Activation::Tanh],
            optimizers: vec![Optimizer::Adaptive],
            learning_rates: vec![0.05],
            batch_sizes: vec![16],
            epochs: vec![20],
            budget: 3,
            folds: 2,
            strategy: SearchStrategy::Bayesian,
            seed: 1,
        }
    }

    #[test]
    fn single_point_space() {
        let (x, y) = toy(60, 1);
        let r = hyperparameter_search(&tiny_space(), &x, &y, &[1, 1]).unwrap();
        assert_eq!(r.evaluations.len(), 1);
        assert_eq!(r.best, tiny_space().candidates()[0]);
    }

    #[test]
    fn budget_one_returns_first_random_draw() {
        let (x, y) = toy(60, 2);
        let mut space = tiny_space();
        space.learning_rates = vec![0.1, 0.01, 0.001];
        space.budget = 1;
        let r = hyperparameter_search(&space, &x, &y, &[1, 1]).unwrap();
        let mut order: Vec<usize> = (0..3).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(space.seed));
        assert_eq!(r.best, space.candidates()[order[0]]);
    }

    #[test]
    fn picks_the_better_of_two() {
        let (x, y) = toy(80, 3);
        let mut space = tiny_space();
        // A vanishing learning rate leaves the network near its random init.
        space.learning_rates = vec![1e-9, 0.05];
        space.budget = 4;
        let r = hyperparameter_search(&space, &x, &y, &[1, 1]).unwrap();
        let exhaustive: Vec<f64> = space
            .candidates()
            .iter()
            .map(|c| {
                cv_auc(&c.to_spec(2, 1), &[1, 1], &x, &y, 2, 1)
                    .unwrap()
                    .unwrap()
            })
            .collect();
        assert!(exhaustive[1] > exhaustive[0]);
        assert_eq!(r.best.learning_rate, 0.05);
        assert_eq!(r.cv_auc, exhaustive[1]);
    }

    #[test]
    fn encoding_is_one_hot_for_categoricals() {
        let space = SearchSpace::default();
        let grid = space.candidates();
        assert_eq!(grid.len(), 3 * 3 * 2 * 3 * 3 * 2 * 2);
        let e = space.encode(&grid[0]);
        assert_eq!(e.len(), 5 + 2 + 3);
        assert_eq!(&e[5..], &[1.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(e[..5].iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn proposal_prefers_unexplored_or_promising_points() {
        let observed = vec![(vec![0.0], 0.5), (vec![1.0], 0.9)];
        let pool = vec![vec![0.1], vec![0.9], vec![5.0]];
        let pick = propose(&observed, &pool);
        assert_ne!(
            pick, 0,
            "a point next to the worst observation is never best"
        );
    }
}
