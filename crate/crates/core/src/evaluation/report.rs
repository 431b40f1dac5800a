use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{bootstrap_ci, classification_metrics, confusion, roc_auc, ConfusionMatrix};
use crate::error::Result;

pub const METRIC_NAMES: [&str; 5] = ["Accuracy", "Precision (PPV)", "Recall", "NPV", "AUC"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric: String,
    pub estimate: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub dataset: String,
    pub rows: usize,
    pub positives: usize,
    pub confusion: ConfusionMatrix,
    pub level: f64,
    pub metrics: Vec<MetricRow>,
}

impl EvaluationReport {
    pub fn metric(&self, name: &str) -> Option<&MetricRow> {
        self.metrics.iter().find(|m| m.metric == name)
    }

    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.metric(name).and_then(|m| m.estimate)
    }
}

fn threshold_metric(which: usize) -> impl Fn(&[f64], &[u8]) -> Option<f64> {
    move |pred: &[f64], labels: &[u8]| {
        let p: Vec<u8> = pred.iter().map(|&v| u8::from(v >= 0.5)).collect();
        let m = classification_metrics(&confusion(&p, labels).ok()?).ok()?;
        match which {
            0 => Some(m.accuracy),
            1 => m.precision,
            2 => m.recall,
            _ => m.npv,
        }
    }
}

fn auc_metric(scores: &[f64], labels: &[u8]) -> Option<f64> {
    roc_auc(scores, labels).ok().map(|r| r.auc)
}

/// Point estimates and percentile-bootstrap intervals for the five reported
/// metrics. `predictions` drive the threshold metrics, `probabilities` the AUC.
pub fn evaluate(
    dataset: &str,
    probabilities: &[f64],
    predictions: &[u8],
    labels: &[u8],
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<EvaluationReport> {
    let cm = confusion(predictions, labels)?;
    let pred_f: Vec<f64> = predictions.iter().map(|&p| f64::from(p)).collect();
    let mut metrics = Vec::with_capacity(METRIC_NAMES.len());
    for (k, name) in METRIC_NAMES.iter().enumerate() {
        let (estimate, ci) = if k < 4 {
            let f = threshold_metric(k);
            (
                f(&pred_f, labels),
                bootstrap_ci(f, &pred_f, labels, n_boot, level, seed + k as u64)?,
            )
        } else {
            (
                auc_metric(probabilities, labels),
                bootstrap_ci(
                    auc_metric,
                    probabilities,
                    labels,
                    n_boot,
                    level,
                    seed + k as u64,
                )?,
            )
        };
        metrics.push(MetricRow {
            metric: (*name).to_string(),
            estimate,
            ci_low: ci.map(|c| c.0),
            ci_high: ci.map(|c| c.1),
        });
    }
    Ok(EvaluationReport {
        dataset: dataset.to_string(),
        rows: labels.len(),
        positives: labels.iter().filter(|&&l| l == 1).count(),
        confusion: cm,
        level,
        metrics,
    })
}

fn cell(row: &MetricRow) -> String {
    // Ratios as percentages, AUC on its natural scale.
    let scale = if row.metric == "AUC" { 1.0 } else { 100.0 };
    match (row.estimate, row.ci_low, row.ci_high) {
        (Some(e), Some(lo), Some(hi)) => {
            format!("{:.2} ({:.2} - {:.2})", e * scale, lo * scale, hi * scale)
        }
        (Some(e), _, _) => format!("{:.2}", e * scale),
        _ => "n/a".to_string(),
    }
}

/// One rendered column: a header and one cell per entry of [`METRIC_NAMES`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableColumn {
    pub header: String,
    pub cells: Vec<String>,
}

impl TableColumn {
    pub fn from_report(r: &EvaluationReport) -> Self {
        Self {
            header: format!(
                "{} ({}; Sepsis: {}, No Sepsis: {})",
                r.dataset,
                r.rows,
                r.positives,
                r.rows - r.positives
            ),
            cells: METRIC_NAMES
                .iter()
                .map(|name| r.metric(name).map_or("n/a".to_string(), cell))
                .collect(),
        }
    }

    /// Point values supplied from elsewhere (no intervals), on the same
    /// scales as the report cells.
    pub fn from_values(header: impl Into<String>, values: &BTreeMap<String, f64>) -> Self {
        Self {
            header: header.into(),
            cells: METRIC_NAMES
                .iter()
                .map(|name| {
                    values
                        .get(*name)
                        .map_or("n/a".to_string(), |v| format!("{v:.2}"))
                })
                .collect(),
        }
    }
}

/// Metrics down the side, one column per dataset.
pub fn render_table(title: &str, reports: &[EvaluationReport]) -> String {
    let columns: Vec<TableColumn> = reports.iter().map(TableColumn::from_report).collect();
    render_columns(title, &columns)
}

pub fn render_columns(title: &str, columns: &[TableColumn]) -> String {
    let mut header = vec!["Metric".to_string()];
    header.extend(columns.iter().map(|c| c.header.clone()));
    let mut grid = vec![header];
    for (k, name) in METRIC_NAMES.iter().enumerate() {
        let mut line = vec![name.to_string()];
        line.extend(
            columns
                .iter()
                .map(|c| c.cells.get(k).cloned().unwrap_or_else(|| "n/a".to_string())),
        );
        grid.push(line);
    }
    let widths: Vec<usize> = (0..grid[0].len())
        .map(|c| grid.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = format!("{title}\n");
    for (i, line) in grid.iter().enumerate() {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
            out.push_str(&rule.join("-+-"));
            out.push('\n');
        }
    }
    out
}
