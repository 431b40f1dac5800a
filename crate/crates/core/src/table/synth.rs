use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Column, ColumnKind, DataTable, DEFAULT_TARGET};

/// Two-class Gaussian surrogate data. Features are unit-variance normals; the
/// positive class is shifted by `separation` on the first `ceil(d / 2)`
/// features and the rest are noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub n: usize,
    pub d: usize,
    pub positive_frac: f64,
    pub separation: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn positive_count(&self) -> usize {
        ((self.n as f64 * self.positive_frac).round() as usize)
            .clamp(1, self.n.saturating_sub(1).max(1))
    }
}

pub fn synth_generate(spec: &SynthSpec) -> Result<DataTable> {
    if spec.n < 2 || spec.d < 1 {
        return Err(Error::invalid("synthetic data needs n >= 2 and d >= 1"));
    }
    if !(spec.positive_frac > 0.0 && spec.positive_frac < 1.0) {
        return Err(Error::invalid("positive_frac must lie in (0, 1)"));
    }
    if !(spec.separation >= 0.0 && spec.separation.is_finite()) {
        return Err(Error::invalid(
            "separation must be a finite nonnegative number",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_pos = spec.positive_count();
    let mut labels: Vec<u8> = (0..spec.n).map(|i| u8::from(i < n_pos)).collect();
    labels.shuffle(&mut rng);

    let informative = spec.d.div_ceil(2);
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(spec.n); spec.d];
    for &label in &labels {
        for (j, col) in columns.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            let shift = if label == 1 && j < informative {
                spec.separation
            } else {
                0.0
            };
            col.push(z + shift);
        }
    }
    let mut out: Vec<Column> = columns
        .into_iter()
        .enumerate()
        .map(|(j, v)| Column::dense(format!("x{}", j + 1), ColumnKind::Continuous, v))
        .collect();
    out.push(Column::dense(
        DEFAULT_TARGET,
        ColumnKind::Target,
        labels.iter().map(|&l| f64::from(l)).collect(),
    ));
    DataTable::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_count_matches_fraction() {
        let t = synth_generate(&SynthSpec {
            n: 2000,
            d: 10,
            positive_frac: 0.02,
            separation: 1.0,
            seed: 1,
        })
        .unwrap();
        assert_eq!(t.positive_count(), 40);
        assert_eq!(t.n_cols(), 11);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SynthSpec {
            n: 50,
            d: 3,
            positive_frac: 0.3,
            separation: 2.0,
            seed: 5,
        };
        assert_eq!(
            synth_generate(&spec).unwrap(),
            synth_generate(&spec).unwrap()
        );
        let other = synth_generate(&SynthSpec {
            seed: 6,
            ..spec.clone()
        })
        .unwrap();
        assert_ne!(other, synth_generate(&spec).unwrap());
    }

    #[test]
    fn informative_features_are_shifted() {
        let t = synth_generate(&SynthSpec {
            n: 4000,
            d: 4,
            positive_frac: 0.5,
            separation: 3.0,
            seed: 2,
        })
        .unwrap();
        let y = t.labels().unwrap();
        let gap = |name: &str| {
            let v = t.column(name).unwrap().dense_values().unwrap();
            let (mut s1, mut n1, mut s0, mut n0) = (0.0, 0.0, 0.0, 0.0);
            for (x, &l) in v.iter().zip(&y) {
                if l == 1 {
                    s1 += x;
                    n1 += 1.0;
                } else {
                    s0 += x;
                    n0 += 1.0;
                }
            }
            s1 / n1 - s0 / n0
        };
        assert!((gap("x1") - 3.0).abs() < 0.2);
        assert!((gap("x2") - 3.0).abs() < 0.2);
        assert!(gap("x3").abs() < 0.2);
    }
}
