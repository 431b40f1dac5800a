//! Averaging the five learners into one weight vector, and top-5 frequency
//! counts.

use serde::{Deserialize, Serialize};

use super::AlgorithmWeights;
use crate::error::{Error, Result};
use crate::matrix::normalize_to_unit_sum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeightSet {
    /// Sorted by algorithm.
    pub per_algorithm: Vec<AlgorithmWeights>,
    pub features: Vec<String>,
    pub composite: Vec<f64>,
    pub retained: Vec<String>,
    pub importance_counts: Vec<u32>,
}

impl FeatureWeightSet {
    pub fn importance_of(&self, feature: &str) -> Option<u32> {
        let i = self.features.iter().position(|f| f == feature)?;
        Some(self.importance_counts[i])
    }
}

/// `1 +` the number of lists naming each feature.
pub fn top5_importance(lists: &[Vec<String>], features: &[String]) -> Vec<u32> {
    features
        .iter()
        .map(|f| 1 + lists.iter().filter(|l| l.contains(f)).count() as u32)
        .collect()
}

pub fn composite_weights(per_algorithm: &[AlgorithmWeights]) -> Result<FeatureWeightSet> {
    let Some(first) = per_algorithm.first() else {
        return Err(Error::invalid(
            "composite weights need at least one algorithm",
        ));
    };
    let features = first.features.clone();
    for w in per_algorithm {
        if w.features != features {
            return Err(Error::invalid(format!(
                "{:?} reports a different feature set",
                w.algorithm
            )));
        }
    }
    let mut sorted = per_algorithm.to_vec();
    sorted.sort_by_key(|w| w.algorithm);
    if sorted.windows(2).any(|p| p[0].algorithm == p[1].algorithm) {
        return Err(Error::invalid("duplicate algorithm in composite"));
    }
    let k = sorted.len() as f64;
    let mean: Vec<f64> = (0..features.len())
        .map(|f| {
            // Sorted summation keeps the result independent of input order.
            let mut vals: Vec<f64> = sorted.iter().map(|w| w.normalized[f]).collect();
            vals.sort_by(f64::total_cmp);
            vals.iter().sum::<f64>() / k
        })
        .collect();
    let composite = normalize_to_unit_sum(&mean);
    let retained = features
        .iter()
        .zip(&composite)
        .filter(|(_, &c)| c > 0.0)
        .map(|(f, _)| f.clone())
        .collect();
    let lists: Vec<Vec<String>> = sorted.iter().map(|w| w.top5.clone()).collect();
    let importance_counts = top5_importance(&lists, &features);
    Ok(FeatureWeightSet {
        per_algorithm: sorted,
        features,
        composite,
        retained,
        importance_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::super::Algorithm;
    use super::*;
    use proptest::prelude::*;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn single_algorithm_passes_through() {
        let w = AlgorithmWeights::new(Algorithm::Lasso, &names(3), vec![1.0, -2.0, 1.0]);
        let set = composite_weights(&[w.clone()]).unwrap();
        assert_eq!(set.composite, w.normalized);
    }

    #[test]
    fn uniform_inputs_give_uniform_output() {
        let ws: Vec<_> = Algorithm::ALL
            .iter()
            .map(|&a| AlgorithmWeights::new(a, &names(4), vec![0.3; 4]))
            .collect();
        let set = composite_weights(&ws).unwrap();
        assert!(set.composite.iter().all(|&c| (c - 0.25).abs() < 1e-15));
        assert_eq!(set.importance_counts, vec![6; 4]);
    }

    #[test]
    fn feature_zero_everywhere_is_dropped() {
        let ws: Vec<_> = Algorithm::ALL
            .iter()
            .map(|&a| AlgorithmWeights::new(a, &names(3), vec![1.0, 0.0, 2.0]))
            .collect();
        let set = composite_weights(&ws).unwrap();
        assert_eq!(set.retained, vec!["f0", "f2"]);
        assert_eq!(set.composite[1], 0.0);
    }

    #[test]
    fn importance_counts() {
        let f = names(3);
        let lists = vec![
            vec!["f0".to_string()],
            vec!["f0".to_string(), "f1".to_string()],
            vec!["f0".to_string()],
            vec![],
            vec![],
        ];
        assert_eq!(top5_importance(&lists, &f), vec![4, 2, 1]);
    }

    #[test]
    fn rejects_empty_and_mismatched() {
        assert!(composite_weights(&[]).is_err());
        let a = AlgorithmWeights::new(Algorithm::Lasso, &names(2), vec![1.0, 1.0]);
        let b = AlgorithmWeights::new(Algorithm::Pca, &names(3), vec![1.0; 3]);
        assert!(composite_weights(&[a, b]).is_err());
    }

    proptest! {
        #[test]
        fn order_invariant(raw in prop::collection::vec(prop::collection::vec(0.0f64..5.0, 4), 5), rot in 0usize..5) {
            let ws: Vec<_> = Algorithm::ALL
                .iter()
                .zip(raw)
                .map(|(&a, r)| AlgorithmWeights::new(a, &names(4), r))
                .collect();
            let base = composite_weights(&ws).unwrap();
            let mut shuffled = ws.clone();
            shuffled.rotate_left(rot);
            shuffled.swap(0, 4);
            let other = composite_weights(&shuffled).unwrap();
            prop_assert_eq!(&base.composite, &other.composite);
            prop_assert_eq!(&base.importance_counts, &other.importance_counts);
            let sum: f64 = base.composite.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }
    }
}
