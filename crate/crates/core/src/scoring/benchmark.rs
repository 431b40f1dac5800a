use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ScoreSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupCounts {
    pub positives: usize,
    pub negatives: usize,
}

impl GroupCounts {
    pub fn total(&self) -> usize {
        self.positives + self.negatives
    }

    /// Share of the group's majority class; `None` for an empty group.
    pub fn purity(&self) -> Option<f64> {
        let n = self.total();
        (n > 0).then(|| self.positives.max(self.negatives) as f64 / n as f64)
    }
}

/// Benchmark score, outcome split, and how outcomes fall relative to the
/// benchmark (rows with score >= benchmark count as "at or above").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub benchmark: f64,
    pub rows: usize,
    pub positive_pct: f64,
    pub negative_pct: f64,
    pub at_or_above: GroupCounts,
    pub below: GroupCounts,
    pub orientation: i8,
}

impl BenchmarkReport {
    pub fn to_text(&self) -> String {
        let purity = |g: &GroupCounts| {
            g.purity()
                .map_or("n/a".to_string(), |p| format!("{:.1}%", 100.0 * p))
        };
        format!(
            "Benchmark score: {:.6}\n\
             Rows: {}\n\
             Outcomes: {:.1}% positive / {:.1}% negative\n\
             Score distribution w.r.t. outcomes:\n\
             \x20 at/above benchmark: {} positive, {} negative (purity {})\n\
             \x20 below benchmark:    {} positive, {} negative (purity {})\n",
            self.benchmark,
            self.rows,
            self.positive_pct,
            self.negative_pct,
            self.at_or_above.positives,
            self.at_or_above.negatives,
            purity(&self.at_or_above),
            self.below.positives,
            self.below.negatives,
            purity(&self.below),
        )
    }
}

pub fn benchmark_report(scores: &ScoreSet, labels: &[u8]) -> Result<BenchmarkReport> {
    if labels.len() != scores.scores.len() {
        return Err(Error::invalid("label count differs from score count"));
    }
    let n = labels.len();
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let mut above = GroupCounts {
        positives: 0,
        negatives: 0,
    };
    let mut below = above;
    for (&s, &l) in scores.scores.iter().zip(labels) {
        let g = if s >= scores.benchmark {
            &mut above
        } else {
            &mut below
        };
        if l == 1 {
            g.positives += 1;
        } else {
            g.negatives += 1;
        }
    }
    let pct = |k: usize| {
        if n == 0 {
            0.0
        } else {
            100.0 * k as f64 / n as f64
        }
    };
    Ok(BenchmarkReport {
        benchmark: scores.benchmark,
        rows: n,
        positive_pct: pct(pos),
        negative_pct: pct(n - pos),
        at_or_above: above,
        below,
        orientation: scores.orientation,
    })
}
