//! The composite scoring core: correlation-signed min-max normalization,
//! bivariate correlation weights, weighted-mean scores with a benchmark and
//! binary flags, and the lasso-driven remapping of feature extremes.

mod benchmark;
mod normalization;
mod remap;
mod score;

pub use benchmark::{benchmark_report, BenchmarkReport, GroupCounts};
pub use normalization::{
    fit_normalization, normalize, normalize_matrix, Direction, FeatureRange, NormalizationMap,
};
pub use remap::{lasso_remap, LassoRemap, REMAP_TOL};
pub use score::{
    compute_scores, delineation_accuracy, flags_against, weighted_mean_scores, ScoreSet,
};

use serde::{Deserialize, Serialize};

use crate::matrix::{pearson, Matrix};

/// Per-feature mean absolute correlation with every other feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateWeights {
    pub features: Vec<String>,
    pub weights: Vec<f64>,
}

/// `weight_f = mean_{g != f} |corr(f, g)|`; a single feature gets weight 1.
pub fn bivariate_weights(normalized: &Matrix, features: &[String]) -> BivariateWeights {
    let d = normalized.cols();
    let cols: Vec<Vec<f64>> = (0..d).map(|j| normalized.column(j)).collect();
    let mut corr = vec![0.0; d * d];
    for a in 0..d {
        for b in (a + 1)..d {
            let c = pearson(&cols[a], &cols[b]).abs();
            corr[a * d + b] = c;
            corr[b * d + a] = c;
        }
    }
    let weights = (0..d)
        .map(|f| {
            if d == 1 {
                1.0
            } else {
                (0..d)
                    .filter(|&g| g != f)
                    .map(|g| corr[f * d + g])
                    .sum::<f64>()
                    / (d - 1) as f64
            }
        })
        .collect();
    BivariateWeights {
        features: features.to_vec(),
        weights,
    }
}
