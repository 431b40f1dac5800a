use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{pearson, Matrix};
use crate::table::{Column, ColumnKind, DataTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Positive,
    Negative,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Positive => 1.0,
            Direction::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub direction: Direction,
}

impl FeatureRange {
    /// Positive: `x / max`; negative: `(max - x) / max`; clipped to [0, 1].
    /// A zero maximum or a degenerate range maps everything to 0. Only `max`
    /// enters the transform; `min` is kept for remapping and audit.
    #[inline]
    pub fn transform(&self, x: f64) -> f64 {
        if self.max == 0.0 || self.min == self.max {
            return 0.0;
        }
        let v = match self.direction {
            Direction::Positive => x / self.max,
            Direction::Negative => (self.max - x) / self.max,
        };
        v.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationMap {
    pub features: Vec<FeatureRange>,
}

impl NormalizationMap {
    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&FeatureRange> {
        self.features.iter().find(|f| f.name == name)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// Min/max per feature from training rows; direction from the sign of the
/// Pearson correlation with the target (zero counts as positive).
pub fn fit_normalization(train: &DataTable) -> Result<NormalizationMap> {
    let labels: Vec<f64> = train.labels()?.into_iter().map(f64::from).collect();
    let features = train
        .features()
        .map(|c| {
            let values = c.dense_values()?;
            let (min, max) = values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            let direction = if pearson(&values, &labels) >= 0.0 {
                Direction::Positive
            } else {
                Direction::Negative
            };
            Ok(FeatureRange {
                name: c.name().to_string(),
                min,
                max,
                direction,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if features.is_empty() {
        return Err(Error::invalid("no feature columns to normalize"));
    }
    Ok(NormalizationMap { features })
}

fn check_coverage(table: &DataTable, map: &NormalizationMap) -> Result<()> {
    for name in table.feature_names() {
        if map.get(&name).is_none() {
            return Err(Error::invalid(format!(
                "feature `{name}` is not in the normalization map"
            )));
        }
    }
    Ok(())
}

/// Normalized features as a dense matrix in map order.
pub fn normalize_matrix(table: &DataTable, map: &NormalizationMap) -> Result<Matrix> {
    check_coverage(table, map)?;
    let mut m = table.matrix(&map.names())?;
    for i in 0..m.rows() {
        for (v, range) in m.row_mut(i).iter_mut().zip(&map.features) {
            *v = range.transform(*v);
        }
    }
    Ok(m)
}

/// Normalized table: the map's features in map order, followed by the
/// target and any identifier columns.
pub fn normalize(table: &DataTable, map: &NormalizationMap) -> Result<DataTable> {
    let m = normalize_matrix(table, map)?;
    let mut columns: Vec<Column> = map
        .features
        .iter()
        .enumerate()
        .map(|(j, f)| Column::dense(f.name.clone(), ColumnKind::Continuous, m.column(j)))
        .collect();
    columns.extend(
        table
            .columns()
            .iter()
            .filter(|c| !c.kind().is_feature())
            .cloned(),
    );
    DataTable::new(columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn range(direction: Direction, min: f64, max: f64) -> FeatureRange {
        FeatureRange {
            name: "f".into(),
            min,
            max,
            direction,
        }
    }

    fn table(cols: Vec<(&str, Vec<f64>)>, y: Vec<f64>) -> DataTable {
        let mut c: Vec<Column> = cols
            .into_iter()
            .map(|(n, v)| Column::dense(n, ColumnKind::Continuous, v))
            .collect();
        c.push(Column::dense("y", ColumnKind::Target, y));
        DataTable::new(c).unwrap()
    }

    #[test]
    fn directions_follow_target_correlation() {
        let y = vec![0.0, 1.0, 0.0, 1.0];
        let t = table(
            vec![
                ("same", y.clone()),
                ("flip", y.iter().map(|v| 1.0 - v).collect()),
                ("flat", vec![3.0; 4]),
            ],
            y,
        );
        let map = fit_normalization(&t).unwrap();
        assert_eq!(map.get("same").unwrap().direction, Direction::Positive);
        assert_eq!(map.get("flip").unwrap().direction, Direction::Negative);
        let flat = map.get("flat").unwrap();
        assert_eq!(flat.direction, Direction::Positive);
        assert_eq!(flat.min, flat.max);
    }

    #[test]
    fn transform_formulas() {
        assert_eq!(range(Direction::Positive, 0.0, 100.0).transform(50.0), 0.5);
        assert!((range(Direction::Negative, 0.0, 100.0).transform(30.0) - 0.7).abs() < 1e-15);
        assert_eq!(range(Direction::Positive, 0.0, 100.0).transform(120.0), 1.0);
        assert_eq!(range(Direction::Positive, 5.0, 5.0).transform(5.0), 0.0);
        assert_eq!(range(Direction::Positive, -3.0, 0.0).transform(-1.0), 0.0);
    }

    #[test]
    fn unknown_feature_is_an_error() {
        let t = table(vec![("a", vec![1.0, 2.0])], vec![0.0, 1.0]);
        let map = NormalizationMap { features: vec![] };
        assert!(normalize(&t, &map).is_err());
    }

    #[test]
    fn normalize_keeps_target() {
        let t = table(vec![("a", vec![1.0, 2.0, 4.0])], vec![0.0, 1.0, 1.0]);
        let map = fit_normalization(&t).unwrap();
        let n = normalize(&t, &map).unwrap();
        assert_eq!(
            n.column("a").unwrap().dense_values().unwrap(),
            vec![0.25, 0.5, 1.0]
        );
        assert_eq!(n.labels().unwrap(), vec![0, 1, 1]);
    }

    proptest! {
        #[test]
        fn output_in_unit_interval(x in -1e6f64..1e6, lo in -1e3f64..1e3, span in 0.0f64..1e3, neg in any::<bool>()) {
            let dir = if neg { Direction::Negative } else { Direction::Positive };
            let v = range(dir, lo, lo + span).transform(x);
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn monotone_in_direction(mut xs in proptest::collection::vec(0.0f64..200.0, 2..30), max in 1.0f64..150.0) {
            xs.sort_by(f64::total_cmp);
            let pos: Vec<f64> = xs.iter().map(|&x| range(Direction::Positive, 0.0, max).transform(x)).collect();
            let neg: Vec<f64> = xs.iter().map(|&x| range(Direction::Negative, 0.0, max).transform(x)).collect();
            prop_assert!(pos.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(neg.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
