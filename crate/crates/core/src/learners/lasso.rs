//! L1-penalized least squares by cyclic coordinate descent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const LASSO_TOL: f64 = 1e-7;
pub const LASSO_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub sweeps: usize,
}

#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Smallest penalty at which every coefficient is zero: `max_j |x_j' y| / n`
/// on centered data.
pub fn lambda_max(x: &Matrix, y: &[f64]) -> f64 {
    let (xc, yc, _, _) = center(x, y);
    let n = x.rows() as f64;
    xc.iter()
        .map(|col| col.iter().zip(&yc).map(|(a, b)| a * b).sum::<f64>().abs() / n)
        .fold(0.0, f64::max)
}

fn center(x: &Matrix, y: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>, f64) {
    let n = x.rows() as f64;
    let y_mean = y.iter().sum::<f64>() / n;
    let yc = y.iter().map(|v| v - y_mean).collect();
    let mut means = Vec::with_capacity(x.cols());
    let cols = (0..x.cols())
        .map(|j| {
            let c = x.column(j);
            let m = c.iter().sum::<f64>() / n;
            means.push(m);
            c.into_iter().map(|v| v - m).collect()
        })
        .collect();
    (cols, yc, means, y_mean)
}

/// Minimizes `(1/2n) ||y - X b - b0||^2 + lambda ||b||_1`. The intercept is
/// unpenalized and handled by centering. Stops when the largest coefficient
/// change in a sweep drops below [`LASSO_TOL`] or after
/// [`LASSO_MAX_SWEEPS`] sweeps.
pub fn fit_lasso(x: &Matrix, y: &[f64], lambda: f64) -> Result<LassoFit> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::invalid("lasso needs at least two rows"));
    }
    if y.len() != n {
        return Err(Error::invalid("lasso target length differs from row count"));
    }
    if !x.all_finite() || y.iter().any(|v| !v.is_finite()) || !(lambda >= 0.0 && lambda.is_finite())
    {
        return Err(Error::invalid(
            "lasso inputs must be finite and lambda nonnegative",
        ));
    }
    let nf = n as f64;
    let (cols, yc, means, y_mean) = center(x, y);
    let sq_norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>() / nf)
        .collect();
    let d = cols.len();
    let mut beta = vec![0.0; d];
    let mut resid = yc;
    let mut sweeps = 0;
    while sweeps < LASSO_MAX_SWEEPS {
        sweeps += 1;
        let mut max_change: f64 = 0.0;
        for j in 0..d {
            if sq_norms[j] <= 0.0 {
                continue;
            }
            let col = &cols[j];
            let old = beta[j];
            let rho =
                col.iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / nf + sq_norms[j] * old;
            let new = soft_threshold(rho, lambda) / sq_norms[j];
            if new != old {
                let delta = new - old;
                for (r, a) in resid.iter_mut().zip(col) {
                    *r -= a * delta;
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < LASSO_TOL {
            break;
        }
    }
    let intercept = y_mean - beta.iter().zip(&means).map(|(b, m)| b * m).sum::<f64>();
    Ok(LassoFit {
        coefficients: beta,
        intercept,
        sweeps,
    })
}
