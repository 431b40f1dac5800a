use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::fit_lasso;
use crate::matrix::Matrix;
use crate::table::DataTable;

use super::NormalizationMap;

/// Coefficients at or below this magnitude leave a feature's range alone.
pub const REMAP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoRemap {
    pub map: NormalizationMap,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Set when the map was returned unchanged because no row was flagged.
    pub warning: Option<String>,
}

/// Fits a lasso of the flags on the normalized features and moves each
/// feature's extremes toward the flagged (flag = 1) rows: a positive
/// coefficient sets `max` to the largest raw value among flagged rows, a
/// negative one sets `min` to the smallest. The input map is not modified.
pub fn lasso_remap(
    train: &DataTable,
    normalized: &Matrix,
    flags: &[u8],
    map: &NormalizationMap,
    lambda: f64,
) -> Result<LassoRemap> {
    if flags.len() != normalized.rows() || train.n_rows() != normalized.rows() {
        return Err(Error::invalid(
            "flags, raw rows and normalized rows differ in length",
        ));
    }
    if normalized.cols() != map.len() {
        return Err(Error::invalid("normalized matrix does not match the map"));
    }
    let y: Vec<f64> = flags.iter().map(|&f| f64::from(f)).collect();
    let fit = fit_lasso(normalized, &y, lambda)?;
    let flagged: Vec<usize> = (0..flags.len()).filter(|&i| flags[i] == 1).collect();
    if flagged.is_empty() {
        return Ok(LassoRemap {
            map: map.clone(),
            coefficients: fit.coefficients,
            intercept: fit.intercept,
            warning: Some("no flagged rows; normalization map left unchanged".into()),
        });
    }

    let raw = train.matrix(&map.names())?;
    let mut out = map.clone();
    for (j, (range, &coef)) in out.features.iter_mut().zip(&fit.coefficients).enumerate() {
        if coef > REMAP_TOL {
            range.max = flagged
                .iter()
                .map(|&i| raw.get(i, j))
                .fold(f64::NEG_INFINITY, f64::max);
        } else if coef < -REMAP_TOL {
            range.min = flagged
                .iter()
                .map(|&i| raw.get(i, j))
                .fold(f64::INFINITY, f64::min);
        }
    }
    Ok(LassoRemap {
        map: out,
        coefficients: fit.coefficients,
        intercept: fit.intercept,
        warning: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::{compute_scores, fit_normalization, normalize_matrix};
    use crate::table::{Column, ColumnKind};

    fn fixture() -> DataTable {
        // x1 drives the flag; x2 is constant so its coefficient is zero.
        let x1 = vec![10.0, 20.0, 30.0, 40.0, 60.0, 80.0, 100.0, 50.0];
        let x2 = vec![7.0; 8];
        let y = vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0];
        DataTable::new(vec![
            Column::dense("x1", ColumnKind::Continuous, x1),
            Column::dense("x2", ColumnKind::Continuous, x2),
            Column::dense("y", ColumnKind::Target, y),
        ])
        .unwrap()
    }

    #[test]
    fn positive_coefficient_pulls_max_to_flagged_rows() {
        let t = fixture();
        let map = fit_normalization(&t).unwrap();
        let x = normalize_matrix(&t, &map).unwrap();
        // Flag rows 4..6 and 7 (raw x1 = 60, 80, 50); the global max 100 is unflagged.
        let flags = vec![0, 0, 0, 0, 1, 1, 0, 1];
        let r = lasso_remap(&t, &x, &flags, &map, 0.0).unwrap();
        assert!(r.coefficients[0] > 0.0);
        assert_eq!(r.map.get("x1").unwrap().max, 80.0);
        assert_eq!(r.map.get("x2").unwrap(), map.get("x2").unwrap());
        assert_eq!(map.get("x1").unwrap().max, 100.0, "input map untouched");
    }

    #[test]
    fn huge_lambda_is_identity() {
        let t = fixture();
        let map = fit_normalization(&t).unwrap();
        let x = normalize_matrix(&t, &map).unwrap();
        let s = compute_scores(&x, &[1.0, 1.0], None).unwrap();
        let r = lasso_remap(&t, &x, &s.flags, &map, 1e6).unwrap();
        assert_eq!(r.map, map);
        assert!(r.coefficients.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn no_flagged_rows_warns() {
        let t = fixture();
        let map = fit_normalization(&t).unwrap();
        let x = normalize_matrix(&t, &map).unwrap();
        let r = lasso_remap(&t, &x, &[0; 8], &map, 0.01).unwrap();
        assert_eq!(r.map, map);
        assert!(r.warning.is_some());
    }

    #[test]
    fn never_widens_the_range() {
        let t = fixture();
        let map = fit_normalization(&t).unwrap();
        let x = normalize_matrix(&t, &map).unwrap();
        for flags in [vec![1, 0, 1, 0, 1, 0, 1, 0], vec![0, 1, 1, 1, 0, 0, 0, 1]] {
            let r = lasso_remap(&t, &x, &flags, &map, 0.0).unwrap();
            for (new, old) in r.map.features.iter().zip(&map.features) {
                assert!(new.min >= old.min && new.max <= old.max);
            }
        }
    }
}
