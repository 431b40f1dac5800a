use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points run from (0,0) to (1,1), one per distinct score, highest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub fpr: Vec<f64>,
    pub tpr: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub auc: f64,
}

impl RocCurve {
    pub fn check_invariants(&self) -> bool {
        let n = self.fpr.len();
        n >= 2
            && self.tpr.len() == n
            && (self.fpr[0], self.tpr[0]) == (0.0, 0.0)
            && (self.fpr[n - 1], self.tpr[n - 1]) == (1.0, 1.0)
            && self.fpr.windows(2).all(|w| w[0] <= w[1])
            && self.tpr.windows(2).all(|w| w[0] <= w[1])
            && (0.0..=1.0).contains(&self.auc)
    }
}

pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::invalid("scores and labels differ in length"));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::invalid(
            "ROC needs both classes (single-class labels)",
        ));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("ROC scores contain NaN"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut fpr, mut tpr, mut thresholds) = (vec![0.0], vec![0.0], vec![f64::INFINITY]);
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        fpr.push(fp as f64 / neg as f64);
        tpr.push(tp as f64 / pos as f64);
        thresholds.push(s);
    }
    let auc = (1..fpr.len())
        .map(|i| (tpr[i] + tpr[i - 1]) / 2.0 * (fpr[i] - fpr[i - 1]))
        .sum();
    Ok(RocCurve {
        fpr,
        tpr,
        thresholds,
        auc,
    })
}

/// Fraction of positive/negative pairs ranked correctly, ties counting half.
pub fn pair_auc(scores: &[f64], labels: &[u8]) -> Option<f64> {
    let mut good = 0.0;
    let mut pairs = 0usize;
    for (i, &li) in labels.iter().enumerate() {
        if li != 1 {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj != 0 {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                good += 1.0;
            } else if scores[i] == scores[j] {
                good += 0.5;
            }
        }
    }
    (pairs > 0).then(|| good / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_example() {
        let roc = roc_auc(&[0.8, 0.4, 0.6, 0.2], &[1, 1, 0, 0]).unwrap();
        assert!((roc.auc - 0.75).abs() < 1e-15);
        assert!(roc.check_invariants());
    }

    #[test]
    fn separated_and_flat() {
        assert_eq!(roc_auc(&[0.9, 0.8, 0.1], &[1, 1, 0]).unwrap().auc, 1.0);
        let flat = roc_auc(&[0.3; 6], &[1, 0, 1, 0, 0, 0]).unwrap();
        assert_eq!(flat.auc, 0.5);
        assert_eq!(flat.fpr.len(), 2);
    }

    #[test]
    fn single_class_errors() {
        assert!(roc_auc(&[0.1, 0.2], &[1, 1]).is_err());
    }

    proptest! {
        #[test]
        fn equals_pair_statistic(rows in prop::collection::vec((0u8..20, 0u8..2), 2..50)) {
            let scores: Vec<f64> = rows.iter().map(|r| f64::from(r.0) / 7.0).collect();
            let labels: Vec<u8> = rows.iter().map(|r| r.1).collect();
            if let Some(oracle) = pair_auc(&scores, &labels) {
                let roc = roc_auc(&scores, &labels).unwrap();
                prop_assert!((roc.auc - oracle).abs() < 1e-9);
                prop_assert!(roc.check_invariants());
                let cubed: Vec<f64> = scores.iter().map(|s| (s - 1.0).powi(3)).collect();
                prop_assert!((roc_auc(&cubed, &labels).unwrap().auc - roc.auc).abs() < 1e-12);
            }
        }
    }
}
