//! Rule extraction from a fitted forest and its human-readable rendering.

use serde::{Deserialize, Serialize};

use super::forest::{ForestNode, RandomForest};
use super::AdjustmentPolicy;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scoring::ScoreSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    Le,
    Gt,
}

/// One split as it appears in the tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: String,
    pub comparator: Comparator,
    pub threshold: f64,
}

/// All splits on one feature merged into `lower < F <= upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub feature: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Bound {
    pub fn contains(&self, v: f64) -> bool {
        self.lower.is_none_or(|l| v > l) && self.upper.is_none_or(|u| v <= u)
    }

    /// Thresholds are shown to four decimals; the JSON keeps full precision.
    pub fn render(&self) -> String {
        match (self.lower.map(short), self.upper.map(short)) {
            (Some(l), Some(u)) => format!("{l} < {} ≤ {u}", self.feature),
            (Some(l), None) => format!("{} > {l}", self.feature),
            (None, Some(u)) => format!("{} ≤ {u}", self.feature),
            (None, None) => self.feature.clone(),
        }
    }
}

fn short(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RulePath {
    pub splits: Vec<Split>,
    pub conditions: Vec<Bound>,
    pub class: u8,
    /// Share of covered rows that belong to `class`.
    pub purity: f64,
    /// Number of rows satisfying every condition.
    pub coverage: usize,
    pub tree: usize,
}

fn merge(splits: &[Split]) -> Vec<Bound> {
    let mut out: Vec<Bound> = Vec::new();
    for s in splits {
        let idx = match out.iter().position(|b| b.feature == s.feature) {
            Some(i) => i,
            None => {
                out.push(Bound {
                    feature: s.feature.clone(),
                    lower: None,
                    upper: None,
                });
                out.len() - 1
            }
        };
        let b = &mut out[idx];
        match s.comparator {
            Comparator::Le => b.upper = Some(b.upper.map_or(s.threshold, |u| u.min(s.threshold))),
            Comparator::Gt => b.lower = Some(b.lower.map_or(s.threshold, |l| l.max(s.threshold))),
        }
    }
    out
}

fn leaf_paths(nodes: &[ForestNode], names: &[String]) -> Vec<(Vec<Split>, u8)> {
    fn walk(
        nodes: &[ForestNode],
        names: &[String],
        i: usize,
        prefix: &mut Vec<Split>,
        out: &mut Vec<(Vec<Split>, u8)>,
    ) {
        match &nodes[i] {
            ForestNode::Leaf { class, .. } => out.push((prefix.clone(), *class)),
            ForestNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                for (child, comparator) in [(*left, Comparator::Le), (*right, Comparator::Gt)] {
                    prefix.push(Split {
                        feature: names[*feature].clone(),
                        comparator,
                        threshold: *threshold,
                    });
                    walk(nodes, names, child, prefix, out);
                    prefix.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(nodes, names, 0, &mut Vec::new(), &mut out);
    out
}

/// Among root-to-leaf paths whose leaf votes `class`, the one maximizing
/// purity × coverage on `(x, y)`. That product is the count of covered rows of
/// `class`, so ties go to the purer path, then the earlier tree.
pub fn extract_target_path(
    forest: &RandomForest,
    x: &Matrix,
    y: &[u8],
    class: u8,
) -> Result<RulePath> {
    if x.cols() != forest.features.len() || y.len() != x.rows() {
        return Err(Error::invalid("path data disagrees with the forest shape"));
    }
    let col = |name: &str| {
        forest
            .features
            .iter()
            .position(|f| f == name)
            .expect("forest feature")
    };
    let mut best: Option<(usize, RulePath)> = None;
    for (t, tree) in forest.trees.iter().enumerate() {
        for (splits, leaf_class) in leaf_paths(&tree.nodes, &forest.features) {
            if leaf_class != class {
                continue;
            }
            let conditions = merge(&splits);
            let cols: Vec<usize> = conditions.iter().map(|b| col(&b.feature)).collect();
            let (mut covered, mut hits) = (0usize, 0usize);
            for i in 0..x.rows() {
                let row = x.row(i);
                if conditions
                    .iter()
                    .zip(&cols)
                    .all(|(b, &c)| b.contains(row[c]))
                {
                    covered += 1;
                    hits += usize::from(y[i] == class);
                }
            }
            if covered == 0 {
                continue;
            }
            let purity = hits as f64 / covered as f64;
            let better = best
                .as_ref()
                .is_none_or(|(h, p)| hits > *h || (hits == *h && purity > p.purity));
            if better {
                best = Some((
                    hits,
                    RulePath {
                        splits,
                        conditions,
                        class,
                        purity,
                        coverage: covered,
                        tree: t,
                    },
                ));
            }
        }
    }
    best.map(|b| b.1).ok_or(Error::NoQualifyingPath(class))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsightReport {
    pub rule: String,
    pub class: u8,
    pub class_name: String,
    pub conditions: Vec<Bound>,
    pub purity: f64,
    pub coverage: usize,
    pub p_up: f64,
    pub p_down: f64,
    pub correlation_sign: i8,
    pub benchmark: f64,
    pub flagged_fraction: f64,
}

impl InsightReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.conditions.is_empty() {
            out.push_str(&format!(
                "No split isolates {}; the prior rate applies: {:.2}% of {} rows.\n",
                self.class_name,
                100.0 * self.purity,
                self.coverage
            ));
        } else {
            out.push_str(&format!("Rule: {}\n", self.rule));
            out.push_str(&format!(
                "Leaf purity {:.2}% over {} rows.\n",
                100.0 * self.purity,
                self.coverage
            ));
        }
        out.push_str(&format!(
            "Adjustments: +{:.1}% on risk-raising features, -{:.1}% on risk-lowering features (score/target sign {:+}).\n",
            100.0 * self.p_up,
            100.0 * self.p_down,
            self.correlation_sign
        ));
        out.push_str(&format!(
            "Benchmark score {:.6}; {:.2}% of rows flagged.\n",
            self.benchmark,
            100.0 * self.flagged_fraction
        ));
        out
    }
}

pub fn render_recommendations(
    path: &RulePath,
    policy: &AdjustmentPolicy,
    scores: &ScoreSet,
    class_names: [&str; 2],
) -> InsightReport {
    let class_name = class_names[usize::from(path.class.min(1))].to_string();
    let body: Vec<String> = path.conditions.iter().map(Bound::render).collect();
    let rule = if body.is_empty() {
        format!("(all rows) → {class_name}")
    } else {
        format!("{} → {class_name}", body.join(" AND "))
    };
    let flagged = scores.flags.iter().filter(|&&f| f == 1).count();
    InsightReport {
        rule,
        class: path.class,
        class_name,
        conditions: path.conditions.clone(),
        purity: path.purity,
        coverage: path.coverage,
        p_up: policy.p_up,
        p_down: policy.p_down,
        correlation_sign: policy.correlation_sign,
        benchmark: scores.benchmark,
        flagged_fraction: if scores.flags.is_empty() {
            0.0
        } else {
            flagged as f64 / scores.flags.len() as f64
        },
    }
}
