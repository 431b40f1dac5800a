//! The five learners behind the composite feature weights, each reduced to a
//! per-feature weight vector, and the combiner that averages them.

mod complement_nb;
mod composite;
mod gbt;
mod lasso;
mod mutual_info;
mod pca;

pub use complement_nb::{fit_complement_nb, ComplementNb};
pub use composite::{composite_weights, top5_importance, FeatureWeightSet};
pub use gbt::{fit_gbt, GbtConfig, GbtModel, RegressionTree, TreeNode};
pub use lasso::{fit_lasso, lambda_max, soft_threshold, LassoFit, LASSO_MAX_SWEEPS, LASSO_TOL};
pub use mutual_info::{mutual_information, mutual_information_column};
pub use pca::{covariance, fit_pca, Pca};

use serde::{Deserialize, Serialize};

use crate::matrix::normalize_to_unit_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Lasso,
    ComplementNb,
    Gbt,
    MutualInfo,
    Pca,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Lasso,
        Algorithm::ComplementNb,
        Algorithm::Gbt,
        Algorithm::MutualInfo,
        Algorithm::Pca,
    ];
}

/// One learner's view of feature relevance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmWeights {
    pub algorithm: Algorithm,
    pub features: Vec<String>,
    /// Signed where the learner has a sign (lasso coefficients, PCA loadings,
    /// complement-NB log-weight differences); nonnegative otherwise.
    pub raw: Vec<f64>,
    /// `|raw| / sum |raw|`, uniform when every raw weight is zero.
    pub normalized: Vec<f64>,
    /// Up to five features with nonzero weight, by descending `|raw|`; ties
    /// keep feature order.
    pub top5: Vec<String>,
}

impl AlgorithmWeights {
    pub fn new(algorithm: Algorithm, features: &[String], raw: Vec<f64>) -> Self {
        assert_eq!(features.len(), raw.len(), "one raw weight per feature");
        let abs: Vec<f64> = raw.iter().map(|v| v.abs()).collect();
        let normalized = normalize_to_unit_sum(&abs);
        let mut order: Vec<usize> = (0..raw.len()).filter(|&i| abs[i] > 0.0).collect();
        order.sort_by(|&a, &b| abs[b].total_cmp(&abs[a]).then(a.cmp(&b)));
        let top5 = order
            .into_iter()
            .take(5)
            .map(|i| features[i].clone())
            .collect();
        Self {
            algorithm,
            features: features.to_vec(),
            raw,
            normalized,
            top5,
        }
    }
}
