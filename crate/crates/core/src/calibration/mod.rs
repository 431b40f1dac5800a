//! Greedy multiplicative weight calibration against delineation accuracy,
//! with regeneration from refined weights when no single-feature move helps,
//! and the alpha sweep applied to scores afterwards.

mod alpha;

pub use alpha::{alpha_grid, alpha_tune, alpha_tune_grid, AlphaChoice};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{normalize_to_unit_sum, Matrix};
use crate::scoring::compute_scores;

fn grid(from: i32, to: i32) -> Vec<f64> {
    let step = if to >= from { 1 } else { -1 };
    let mut out = Vec::new();
    let mut k = from;
    loop {
        out.push(f64::from(k) / 20.0);
        if k == to {
            break;
        }
        k += step;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Multipliers tried when raising a weight, 1.00 to 2.00.
    pub positive_grid: Vec<f64>,
    /// Increment used past the top of the positive grid.
    pub extended_step: f64,
    /// Multipliers tried when lowering a weight, 1.00 down to 0.00.
    pub negative_grid: Vec<f64>,
    pub max_outer_iterations: usize,
    pub max_regens: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            positive_grid: grid(20, 40),
            extended_step: 0.25,
            negative_grid: grid(20, 0),
            max_outer_iterations: 10,
            max_regens: 3,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.positive_grid.is_empty() || self.negative_grid.is_empty() {
            return Err(Error::invalid("calibration grids must be nonempty"));
        }
        if !(self.extended_step > 0.0) {
            return Err(Error::invalid("extended step must be positive"));
        }
        let bad = |g: &[f64]| g.iter().any(|&m| !(m >= 0.0) || !m.is_finite());
        if bad(&self.positive_grid) || bad(&self.negative_grid) {
            return Err(Error::invalid(
                "grid multipliers must be finite and nonnegative",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Raise,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStep {
    pub iteration: usize,
    pub kind: StepKind,
    /// Feature whose weight was scaled.
    pub target: String,
    pub multiplier: f64,
    pub accuracy_before: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regeneration {
    pub iteration: usize,
    pub accuracy_before: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationState {
    pub features: Vec<String>,
    pub baseline_accuracy: f64,
    /// Best weights seen over the whole run.
    pub current_weights: Vec<f64>,
    pub current_accuracy: f64,
    pub history: Vec<CalibrationStep>,
    /// Accuracy of each regenerated weight set at the moment it replaced the
    /// working weights. These restarts are not accepted steps and may lower
    /// the working accuracy; the best weights are kept regardless.
    pub regenerations: Vec<Regeneration>,
    pub iterations: usize,
}

struct Evaluator<'a> {
    x: &'a Matrix,
    labels: &'a [u8],
}

impl Evaluator<'_> {
    fn accuracy(&self, w: &[f64]) -> Option<f64> {
        compute_scores(self.x, w, Some(self.labels))
            .ok()
            .and_then(|s| s.delineation_accuracy)
    }
}

/// Best strictly improving multiplier for feature `f`, with the extension
/// past the grid end. Returns (multiplier, accuracy).
fn sweep(
    eval: &Evaluator,
    w: &[f64],
    f: usize,
    acc: f64,
    grid: &[f64],
    extend: f64,
) -> Option<(f64, f64)> {
    let try_m = |m: f64| {
        let mut trial = w.to_vec();
        trial[f] = w[f] * m;
        eval.accuracy(&trial)
    };
    let mut best: Option<(f64, f64)> = None;
    for &m in grid {
        if m == 1.0 {
            continue;
        }
        if let Some(a) = try_m(m) {
            if a > best.map_or(acc, |b| b.1) {
                best = Some((m, a));
            }
        }
    }
    let (mut m, mut a) = best?;
    let edge = if extend > 0.0 {
        grid.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        grid.iter().copied().fold(f64::INFINITY, f64::min)
    };
    if m == edge {
        loop {
            let next = (m + extend).max(0.0);
            if next == m {
                break;
            }
            match try_m(next) {
                Some(na) if na > a => {
                    m = next;
                    a = na;
                }
                _ => break,
            }
        }
    }
    Some((m, a))
}

/// `refined` with its five largest entries multiplied by their importance
/// counts, renormalized.
pub fn regenerate(refined: &[f64], importance: &[u32]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..refined.len()).collect();
    order.sort_by(|&a, &b| refined[b].total_cmp(&refined[a]).then(a.cmp(&b)));
    let mut out = refined.to_vec();
    for &i in order.iter().take(5) {
        out[i] *= f64::from(importance[i]);
    }
    normalize_to_unit_sum(&out)
}

pub fn calibrate(
    features: &[String],
    weights: &[f64],
    x: &Matrix,
    labels: &[u8],
    refined: &[f64],
    importance: &[u32],
    config: &CalibrationConfig,
) -> Result<CalibrationState> {
    config.validate()?;
    let d = weights.len();
    if features.len() != d || refined.len() != d || importance.len() != d || x.cols() != d {
        return Err(Error::invalid(
            "calibration inputs disagree on the feature count",
        ));
    }
    if labels.len() != x.rows() {
        return Err(Error::invalid("label count differs from row count"));
    }
    let eval = Evaluator { x, labels };
    let baseline = eval
        .accuracy(weights)
        .ok_or_else(|| Error::invalid("baseline weights cannot be scored"))?;
    let mut state = CalibrationState {
        features: features.to_vec(),
        baseline_accuracy: baseline,
        current_weights: weights.to_vec(),
        current_accuracy: baseline,
        history: Vec::new(),
        regenerations: Vec::new(),
        iterations: 0,
    };
    let single_class = labels.iter().all(|&l| l == labels[0]);
    if single_class || baseline >= 1.0 {
        return Ok(state);
    }

    let mut w = weights.to_vec();
    let mut acc = baseline;
    for iteration in 1..=config.max_outer_iterations {
        state.iterations = iteration;
        let mut changed = false;
        for (kind, grid, ext) in [
            (StepKind::Raise, &config.positive_grid, config.extended_step),
            (
                StepKind::Lower,
                &config.negative_grid,
                -config.extended_step,
            ),
        ] {
            let mut order: Vec<usize> = (0..d).filter(|&i| w[i] > 0.0).collect();
            order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
            for f in order {
                if let Some((m, a)) = sweep(&eval, &w, f, acc, grid, ext) {
                    w[f] *= m;
                    state.history.push(CalibrationStep {
                        iteration,
                        kind,
                        target: features[f].clone(),
                        multiplier: m,
                        accuracy_before: acc,
                        accuracy: a,
                    });
                    acc = a;
                    changed = true;
                }
            }
            if changed {
                break;
            }
        }
        if acc > state.current_accuracy {
            state.current_accuracy = acc;
            state.current_weights = w.clone();
        }
        if acc >= 1.0 {
            break;
        }
        if !changed {
            if state.regenerations.len() >= config.max_regens {
                break;
            }
            let fresh = regenerate(refined, importance);
            let Some(a) = eval.accuracy(&fresh) else {
                break;
            };
            state.regenerations.push(Regeneration {
                iteration,
                accuracy_before: acc,
                accuracy: a,
            });
            w = fresh;
            acc = a;
            if acc > state.current_accuracy {
                state.current_accuracy = acc;
                state.current_weights = w.clone();
            }
        }
    }
    Ok(state)
}
