//! Confusion counts, ratio metrics, ROC/AUC, bootstrap intervals and the
//! comparison-table report.

mod bootstrap;
mod report;
mod roc;

pub use bootstrap::{bootstrap_ci, percentile};
pub use report::{
    evaluate, render_columns, render_table, EvaluationReport, MetricRow, TableColumn, METRIC_NAMES,
};
pub use roc::{pair_auc, roc_auc, RocCurve};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

pub fn confusion(pred: &[u8], labels: &[u8]) -> Result<ConfusionMatrix> {
    if pred.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            pred.len(),
            labels.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &l) in pred.iter().zip(labels) {
        match (p == 1, l == 1) {
            (true, true) => cm.tp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// Ratios with an empty denominator are `None` rather than zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub npv: Option<f64>,
    pub fpr: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn classification_metrics(cm: &ConfusionMatrix) -> Result<ClassificationMetrics> {
    if cm.total() == 0 {
        return Err(Error::invalid("no rows to evaluate"));
    }
    Ok(ClassificationMetrics {
        accuracy: (cm.tp + cm.tn) as f64 / cm.total() as f64,
        precision: ratio(cm.tp, cm.tp + cm.fp),
        recall: ratio(cm.tp, cm.tp + cm.fn_),
        npv: ratio(cm.tn, cm.tn + cm.fn_),
        fpr: ratio(cm.fp, cm.fp + cm.tn),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_cases() {
        let labels = [1, 1, 1, 0, 0];
        let cm = confusion(&labels, &labels).unwrap();
        assert_eq!((cm.tp, cm.tn, cm.fp, cm.fn_), (3, 2, 0, 0));
        let flipped: Vec<u8> = labels.iter().map(|l| 1 - l).collect();
        let cm = confusion(&flipped, &labels).unwrap();
        assert_eq!((cm.tp, cm.tn), (0, 0));
        let cm = confusion(&[1, 1, 0], &[1, 0, 0]).unwrap();
        assert_eq!((cm.tp, cm.fp, cm.tn, cm.fn_), (1, 1, 1, 0));
        assert!(confusion(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn metric_formulas() {
        let perfect = ConfusionMatrix {
            tp: 5,
            tn: 5,
            fp: 0,
            fn_: 0,
        };
        let m = classification_metrics(&perfect).unwrap();
        assert_eq!(
            (m.accuracy, m.precision, m.recall),
            (1.0, Some(1.0), Some(1.0))
        );
        let half = ConfusionMatrix {
            tp: 1,
            fp: 1,
            tn: 0,
            fn_: 0,
        };
        let m = classification_metrics(&half).unwrap();
        assert_eq!((m.accuracy, m.precision), (0.5, Some(0.5)));
        assert_eq!(m.npv, None);
    }

    #[test]
    fn undefined_precision_is_absent() {
        let cm = ConfusionMatrix {
            tp: 0,
            fp: 0,
            tn: 4,
            fn_: 2,
        };
        let m = classification_metrics(&cm).unwrap();
        assert_eq!(m.precision, None);
        assert_eq!(m.recall, Some(0.0));
        assert!(classification_metrics(&ConfusionMatrix::default()).is_err());
    }
}
