use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{mean, pearson, Matrix};

/// Per-row scores with their benchmark (the mean score) and the binary flags
/// obtained by comparing each score against it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub scores: Vec<f64>,
    pub benchmark: f64,
    pub flags: Vec<u8>,
    /// +1 when higher scores mean the positive class, -1 otherwise.
    pub orientation: i8,
    /// Agreement between flags and labels; present only when labels were given.
    pub delineation_accuracy: Option<f64>,
}

impl ScoreSet {
    /// Re-checks the benchmark/flag/accuracy invariants from the fields alone.
    pub fn check_invariants(&self, labels: Option<&[u8]>) -> bool {
        let bench_ok = (mean(&self.scores) - self.benchmark).abs() <= 1e-12;
        let flags_ok = self.flags == flags_against(&self.scores, self.benchmark, self.orientation);
        let acc_ok = match (labels, self.delineation_accuracy) {
            (Some(l), Some(a)) => {
                (delineation_accuracy(&self.flags, l) - a).abs() == 0.0 && (0.0..=1.0).contains(&a)
            }
            (None, None) => true,
            _ => false,
        };
        bench_ok && flags_ok && acc_ok && (self.orientation == 1 || self.orientation == -1)
    }
}

/// `score_i = sum_f w_f x_if / sum_f w_f`.
pub fn weighted_mean_scores(x: &Matrix, weights: &[f64]) -> Result<Vec<f64>> {
    if weights.len() != x.cols() {
        return Err(Error::invalid(format!(
            "{} weights for {} features",
            weights.len(),
            x.cols()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::invalid("weights must be finite and nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("all-zero weights"));
    }
    Ok((0..x.rows())
        .map(|i| {
            x.row(i)
                .iter()
                .zip(weights)
                .map(|(v, w)| v * w)
                .sum::<f64>()
                / total
        })
        .collect())
}

/// `flag = 1` iff `orientation * (score - benchmark) >= 0`.
pub fn flags_against(scores: &[f64], benchmark: f64, orientation: i8) -> Vec<u8> {
    let o = f64::from(orientation);
    scores
        .iter()
        .map(|&s| u8::from(o * (s - benchmark) >= 0.0))
        .collect()
}

pub fn delineation_accuracy(flags: &[u8], labels: &[u8]) -> f64 {
    if flags.is_empty() {
        return 0.0;
    }
    let hits = flags.iter().zip(labels).filter(|(f, l)| f == l).count();
    hits as f64 / flags.len() as f64
}

pub fn compute_scores(x: &Matrix, weights: &[f64], labels: Option<&[u8]>) -> Result<ScoreSet> {
    let scores = weighted_mean_scores(x, weights)?;
    if let Some(l) = labels {
        if l.len() != scores.len() {
            return Err(Error::invalid("label count differs from row count"));
        }
    }
    Ok(score_set_from(scores, labels))
}

pub(crate) fn score_set_from(scores: Vec<f64>, labels: Option<&[u8]>) -> ScoreSet {
    let benchmark = mean(&scores);
    let orientation = match labels {
        Some(l) => {
            let lf: Vec<f64> = l.iter().map(|&v| f64::from(v)).collect();
            if pearson(&scores, &lf) < 0.0 {
                -1
            } else {
                1
            }
        }
        None => 1,
    };
    let flags = flags_against(&scores, benchmark, orientation);
    let delineation_accuracy = labels.map(|l| delineation_accuracy(&flags, l));
    ScoreSet {
        scores,
        benchmark,
        flags,
        orientation,
        delineation_accuracy,
    }
}
