//! Plug-in mutual information between a binned feature and a binary label.

use crate::matrix::Matrix;

/// MI in nats between `values` (cut into `bins` equal-width bins over the
/// observed range) and `y`. Empty cells contribute nothing.
pub fn mutual_information_column(values: &[f64], y: &[u8], bins: usize) -> f64 {
    let n = values.len();
    if n == 0 || bins < 2 {
        return 0.0;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut joint = vec![[0usize; 2]; bins];
    for (&v, &l) in values.iter().zip(y) {
        let b = if width > 0.0 {
            (((v - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        joint[b][usize::from(l)] += 1;
    }
    let nf = n as f64;
    let class = [
        joint.iter().map(|c| c[0]).sum::<usize>() as f64 / nf,
        joint.iter().map(|c| c[1]).sum::<usize>() as f64 / nf,
    ];
    let mut mi = 0.0;
    for cell in &joint {
        let pb = (cell[0] + cell[1]) as f64 / nf;
        for c in 0..2 {
            if cell[c] == 0 {
                continue;
            }
            let p = cell[c] as f64 / nf;
            mi += p * (p / (pb * class[c])).ln();
        }
    }
    mi.max(0.0)
}

pub fn mutual_information(x: &Matrix, y: &[u8], bins: usize) -> Vec<f64> {
    (0..x.cols())
        .map(|j| mutual_information_column(&x.column(j), y, bins))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_feature_carries_nothing() {
        let y = [0, 1, 0, 1, 1];
        assert_eq!(mutual_information_column(&[3.0; 5], &y, 10), 0.0);
    }

    #[test]
    fn copy_of_balanced_label_is_ln2() {
        let y: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
        let x: Vec<f64> = y.iter().map(|&l| f64::from(l)).collect();
        let mi = mutual_information_column(&x, &y, 10);
        assert!((mi - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn matches_hand_count() {
        // Bins {0,0,1,1} against labels {0,1,1,1}: p(b=0)=1/2, p(c=1)=3/4.
        let x = [0.0, 0.0, 1.0, 1.0];
        let y = [0, 1, 1, 1];
        let expected = 0.25 * (0.25f64 / (0.5 * 0.25)).ln()
            + 0.25 * (0.25f64 / (0.5 * 0.75)).ln()
            + 0.5 * (0.5f64 / (0.5 * 0.75)).ln();
        assert!((mutual_information_column(&x, &y, 10) - expected).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn nonnegative_and_permutation_invariant(
            rows in prop::collection::vec((-50.0f64..50.0, 0u8..2), 2..60),
            rot in 0usize..60,
        ) {
            let x: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let y: Vec<u8> = rows.iter().map(|r| r.1).collect();
            let mi = mutual_information_column(&x, &y, 10);
            prop_assert!(mi >= 0.0);
            let k = rot % x.len();
            let (mut xr, mut yr) = (x.clone(), y.clone());
            xr.rotate_left(k);
            yr.rotate_left(k);
            prop_assert!((mutual_information_column(&xr, &yr, 10) - mi).abs() < 1e-12);
        }
    }
}
