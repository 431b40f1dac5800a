//! Complement naive Bayes feature weights.
//!
//! For class `c`, the complement log-weight of feature `f` is
//!
//! ```text
//! w[c][f] = ln( (sum_{i not in c} x[i][f] + 1) / (sum_{i not in c} sum_g x[i][g] + d) )
//! ```
//!
//! with add-one smoothing over `d` features. A feature's weight is
//! `|w[pos][f] - w[neg][f]|`; the signed value `w[neg][f] - w[pos][f]` is
//! positive for features concentrated in the positive class.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplementNb {
    /// Complement log-weights for the positive class (computed from negatives).
    pub log_weights_pos: Vec<f64>,
    /// Complement log-weights for the negative class (computed from positives).
    pub log_weights_neg: Vec<f64>,
}

impl ComplementNb {
    pub fn signed_weights(&self) -> Vec<f64> {
        self.log_weights_neg
            .iter()
            .zip(&self.log_weights_pos)
            .map(|(n, p)| n - p)
            .collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.signed_weights().into_iter().map(f64::abs).collect()
    }
}

pub fn fit_complement_nb(x: &Matrix, y: &[u8]) -> Result<ComplementNb> {
    if y.len() != x.rows() {
        return Err(Error::invalid("label count differs from row count"));
    }
    if x.as_slice().iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::invalid(
            "complement naive Bayes needs nonnegative inputs",
        ));
    }
    if !y.contains(&1) || !y.contains(&0) {
        return Err(Error::invalid("complement naive Bayes needs both classes"));
    }
    let d = x.cols();
    let mut sums = [vec![0.0; d], vec![0.0; d]];
    for i in 0..x.rows() {
        let c = usize::from(y[i] == 1);
        for (s, &v) in sums[c].iter_mut().zip(x.row(i)) {
            *s += v;
        }
    }
    let complement = |counts: &[f64]| -> Vec<f64> {
        let total: f64 = counts.iter().sum::<f64>() + d as f64;
        counts.iter().map(|&c| ((c + 1.0) / total).ln()).collect()
    };
    Ok(ComplementNb {
        log_weights_pos: complement(&sums[0]),
        log_weights_neg: complement(&sums[1]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_across_classes_weighs_zero() {
        let x = Matrix::from_rows(&[
            vec![0.5, 0.2],
            vec![0.5, 0.9],
            vec![0.5, 0.1],
            vec![0.5, 0.3],
        ])
        .unwrap();
        let y = [1, 1, 0, 0];
        let w = fit_complement_nb(&x, &y).unwrap().weights();
        // Feature 0 sums to 1.0 in both classes; the totals differ, so the
        // weight is exactly the log-ratio of the smoothed totals.
        let tot_pos = 1.0 + 1.1 + 2.0;
        let tot_neg = 1.0 + 0.4 + 2.0;
        let expected = (2.0f64 / tot_neg).ln() - (2.0f64 / tot_pos).ln();
        assert!((w[0] - expected.abs()).abs() < 1e-12);
        let x = Matrix::from_rows(&[vec![0.5], vec![0.5], vec![0.5], vec![0.5]]).unwrap();
        let w = fit_complement_nb(&x, &y).unwrap().weights();
        assert!(w[0].abs() < 1e-12);
    }

    #[test]
    fn hand_computed_two_by_two() {
        // Positives carry counts (3, 1), negatives (1, 3).
        let x = Matrix::from_rows(&[vec![3.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let y = [1, 0];
        let nb = fit_complement_nb(&x, &y).unwrap();
        // Complement of positive = negatives: ln(2/6), ln(4/6).
        // Complement of negative = positives: ln(4/6), ln(2/6).
        assert!((nb.log_weights_pos[0] - (2.0f64 / 6.0).ln()).abs() < 1e-15);
        assert!((nb.log_weights_neg[0] - (4.0f64 / 6.0).ln()).abs() < 1e-15);
        let w = nb.weights();
        let ln2 = std::f64::consts::LN_2;
        assert!((w[0] - ln2).abs() < 1e-12 && (w[1] - ln2).abs() < 1e-12);
        let s = nb.signed_weights();
        assert!(s[0] > 0.0 && s[1] < 0.0);
    }

    #[test]
    fn exchangeable_features_weigh_equally() {
        let x = Matrix::from_rows(&[vec![0.2, 0.2], vec![0.7, 0.7], vec![0.1, 0.1]]).unwrap();
        let w = fit_complement_nb(&x, &[1, 1, 0]).unwrap().weights();
        assert_eq!(w[0], w[1]);
    }

    #[test]
    fn negative_input_rejected() {
        let x = Matrix::from_rows(&[vec![-0.1], vec![0.2]]).unwrap();
        assert!(fit_complement_nb(&x, &[1, 0]).is_err());
    }
}
