//! Actionable insights: percentage adjustment of features by the sign of
//! their weight, a shallow random forest on the adjusted data, and the best
//! root-to-leaf rule for a chosen class.

mod forest;
mod path;

pub use forest::{
    fit_random_forest, fit_random_forest_matrix, DecisionTree, ForestConfig, ForestNode,
    RandomForest,
};
pub use path::{
    extract_target_path, render_recommendations, Bound, Comparator, InsightReport, RulePath, Split,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{Column, DataTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdjustmentPolicy {
    /// Fractional increase applied to risk-raising features.
    pub p_up: f64,
    /// Fractional decrease applied to risk-lowering features.
    pub p_down: f64,
    /// Sign of the correlation between score and target.
    pub correlation_sign: i8,
}

impl Default for AdjustmentPolicy {
    fn default() -> Self {
        Self {
            p_up: 0.1,
            p_down: 0.1,
            correlation_sign: 1,
        }
    }
}

impl AdjustmentPolicy {
    pub fn validate(&self) -> Result<()> {
        let ok = |p: f64| (0.0..1.0).contains(&p);
        if !ok(self.p_up) || !ok(self.p_down) {
            return Err(Error::invalid("adjustment percentages must lie in [0, 1)"));
        }
        if self.correlation_sign != 1 && self.correlation_sign != -1 {
            return Err(Error::invalid("correlation sign must be +1 or -1"));
        }
        Ok(())
    }

    /// Multiplier for a feature whose weight has sign `weight_sign`.
    pub fn multiplier(&self, weight_sign: f64) -> f64 {
        let raise = (weight_sign > 0.0) == (self.correlation_sign > 0);
        if weight_sign == 0.0 {
            1.0
        } else if raise {
            1.0 + self.p_up
        } else {
            1.0 - self.p_down
        }
    }
}

/// Scales every feature with a known weight sign by the policy multiplier.
/// Target, identifiers and features without a sign are left alone.
pub fn adjust_features(
    table: &DataTable,
    signs: &BTreeMap<String, f64>,
    policy: &AdjustmentPolicy,
) -> Result<DataTable> {
    policy.validate()?;
    let columns: Vec<Column> = table
        .columns()
        .iter()
        .map(|c| {
            let Some(&sign) = signs.get(c.name()).filter(|_| c.kind().is_feature()) else {
                return c.clone();
            };
            let m = policy.multiplier(sign);
            let mut out = c.clone();
            for r in 0..c.len() {
                if let Some(v) = c.get(r) {
                    out.set(r, v * m);
                }
            }
            out
        })
        .collect();
    DataTable::new(columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::ColumnKind;

    fn table() -> DataTable {
        DataTable::new(vec![
            Column::new("up", ColumnKind::Continuous, vec![Some(100.0), None]),
            Column::dense("down", ColumnKind::Continuous, vec![100.0, 50.0]),
            Column::dense("SepsisLabel", ColumnKind::Target, vec![1.0, 0.0]),
        ])
        .unwrap()
    }

    fn signs() -> BTreeMap<String, f64> {
        [("up".to_string(), 1.0), ("down".to_string(), -1.0)].into()
    }

    #[test]
    fn four_formulas() {
        let mut p = AdjustmentPolicy::default();
        let t = adjust_features(&table(), &signs(), &p).unwrap();
        assert!((t.column("up").unwrap().get(0).unwrap() - 110.0).abs() < 1e-12);
        assert!((t.column("down").unwrap().get(0).unwrap() - 90.0).abs() < 1e-12);
        assert_eq!(t.column("up").unwrap().get(1), None);
        p.correlation_sign = -1;
        let t = adjust_features(&table(), &signs(), &p).unwrap();
        assert!((t.column("up").unwrap().get(0).unwrap() - 90.0).abs() < 1e-12);
        assert!((t.column("down").unwrap().get(0).unwrap() - 110.0).abs() < 1e-12);
        assert_eq!(t.target(), table().target());
    }

    #[test]
    fn zero_percent_is_identity() {
        let p = AdjustmentPolicy {
            p_up: 0.0,
            p_down: 0.0,
            correlation_sign: 1,
        };
        assert_eq!(adjust_features(&table(), &signs(), &p).unwrap(), table());
    }

    #[test]
    fn rejects_bad_policy() {
        let p = AdjustmentPolicy {
            p_up: 1.0,
            ..AdjustmentPolicy::default()
        };
        assert!(adjust_features(&table(), &signs(), &p).is_err());
    }
}
