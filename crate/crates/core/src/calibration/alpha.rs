use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scoring::{delineation_accuracy, flags_against, weighted_mean_scores, ScoreSet};

/// 0.5, 0.6, ..., 1.5, built from integers so 1.0 is exact.
pub fn alpha_grid() -> Vec<f64> {
    (5..=15).map(|k| f64::from(k) / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaChoice {
    pub alpha: f64,
    pub accuracy: f64,
    /// (alpha, accuracy) for every grid point.
    pub sweep: Vec<(f64, f64)>,
}

/// Scales held-out scores by each alpha and flags them against the fixed
/// training benchmark; keeps the alpha with the best delineation accuracy,
/// preferring the smallest on ties.
pub fn alpha_tune(
    train: &ScoreSet,
    x: &Matrix,
    weights: &[f64],
    labels: &[u8],
) -> Result<AlphaChoice> {
    alpha_tune_grid(train, x, weights, labels, &alpha_grid())
}

pub fn alpha_tune_grid(
    train: &ScoreSet,
    x: &Matrix,
    weights: &[f64],
    labels: &[u8],
    grid: &[f64],
) -> Result<AlphaChoice> {
    if grid.is_empty() || grid.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::invalid("alpha grid must be nonempty and positive"));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    if x.rows() == 0 {
        return Err(Error::invalid(
            "alpha tuning needs at least one held-out row",
        ));
    }
    if labels.len() != x.rows() {
        return Err(Error::invalid("label count differs from row count"));
    }
    let base = weighted_mean_scores(x, weights)?;
    let mut sweep = Vec::new();
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for alpha in grid {
        let scaled: Vec<f64> = base.iter().map(|s| alpha * s).collect();
        let flags = flags_against(&scaled, train.benchmark, train.orientation);
        let acc = delineation_accuracy(&flags, labels);
        sweep.push((alpha, acc));
        if acc > best.1 {
            best = (alpha, acc);
        }
    }
    Ok(AlphaChoice {
        alpha: best.0,
        accuracy: best.1,
        sweep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn train_set(benchmark: f64) -> ScoreSet {
        ScoreSet {
            scores: vec![benchmark],
            benchmark,
            flags: vec![1],
            orientation: 1,
            delineation_accuracy: None,
        }
    }

    #[test]
    fn grid_contains_identity() {
        let g = alpha_grid();
        assert_eq!(g.len(), 11);
        assert!(g.contains(&1.0));
        assert_eq!(g[0], 0.5);
        assert_eq!(g[10], 1.5);
    }

    #[test]
    fn flag_flips_at_one_point_five() {
        let x = Matrix::from_rows(&[vec![0.25]]).unwrap();
        let choice = alpha_tune(&train_set(0.30), &x, &[1.0], &[1]).unwrap();
        // 0.25 * 1.5 = 0.375 crosses 0.30; 0.25 * 1.2 = 0.30 is the first hit.
        assert_eq!(choice.alpha, 1.2);
        assert_eq!(choice.accuracy, 1.0);
        let at = |a: f64| choice.sweep.iter().find(|p| p.0 == a).unwrap().1;
        assert_eq!(at(1.0), 0.0);
        assert_eq!(at(1.5), 1.0);
    }

    #[test]
    fn ties_take_smallest_alpha() {
        let x = Matrix::from_rows(&[vec![0.9], vec![0.01]]).unwrap();
        let choice = alpha_tune(&train_set(0.3), &x, &[1.0], &[1, 0]).unwrap();
        assert_eq!(choice.alpha, 0.5);
    }

    #[test]
    fn empty_holdout_errors() {
        let x = Matrix::zeros(0, 1);
        assert!(alpha_tune(&train_set(0.3), &x, &[1.0], &[]).is_err());
    }
}
