//! Principal components of the feature covariance matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    /// `d x d`; column `k` is the k-th principal direction.
    pub loadings: Matrix,
    /// Eigenvalues of the covariance matrix, non-increasing.
    pub explained_variance: Vec<f64>,
}

impl Pca {
    /// `|loading|` on the first component; all zero when the data has no
    /// variance at all.
    pub fn first_component_weights(&self) -> Vec<f64> {
        let d = self.loadings.rows();
        if d == 0 || self.explained_variance[0] <= 1e-12 {
            return vec![0.0; d];
        }
        (0..d).map(|i| self.loadings.get(i, 0).abs()).collect()
    }

    /// Signed first-component loadings.
    pub fn first_component(&self) -> Vec<f64> {
        (0..self.loadings.rows())
            .map(|i| self.loadings.get(i, 0))
            .collect()
    }
}

pub fn covariance(x: &Matrix) -> Matrix {
    let (n, d) = (x.rows(), x.cols());
    let means: Vec<f64> = (0..d)
        .map(|j| (0..n).map(|i| x.get(i, j)).sum::<f64>() / n as f64)
        .collect();
    let mut cov = Matrix::zeros(d, d);
    for i in 0..n {
        let row = x.row(i);
        for a in 0..d {
            let da = row[a] - means[a];
            for b in a..d {
                let v = cov.get(a, b) + da * (row[b] - means[b]);
                cov.set(a, b, v);
            }
        }
    }
    let denom = (n - 1) as f64;
    for a in 0..d {
        for b in a..d {
            let v = cov.get(a, b) / denom;
            cov.set(a, b, v);
            cov.set(b, a, v);
        }
    }
    cov
}

pub fn fit_pca(x: &Matrix) -> Result<Pca> {
    if x.rows() < 2 {
        return Err(Error::invalid("PCA needs at least two rows"));
    }
    if !x.all_finite() {
        return Err(Error::invalid("PCA inputs must be finite"));
    }
    let d = x.cols();
    let cov = covariance(x);
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(d, d, cov.as_slice()));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let mut loadings = Matrix::zeros(d, d);
    let mut explained_variance = Vec::with_capacity(d);
    for (k, &src) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(src);
        // Sign convention: the largest-magnitude entry is positive.
        let mut pivot = 0;
        for i in 1..d {
            if v[i].abs() > v[pivot].abs() + 1e-12 {
                pivot = i;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..d {
            loadings.set(i, k, sign * v[i]);
        }
        explained_variance.push(eig.eigenvalues[src].max(0.0));
    }
    Ok(Pca {
        loadings,
        explained_variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Power iteration with deflation, independent of the eigen solver.
    fn power_eigen(cov: &Matrix) -> (Vec<f64>, Vec<Vec<f64>>) {
        let d = cov.rows();
        let mut a: Vec<Vec<f64>> = (0..d).map(|i| cov.row(i).to_vec()).collect();
        let mut values = Vec::new();
        let mut vectors = Vec::new();
        for k in 0..d {
            let mut v: Vec<f64> = (0..d).map(|i| 1.0 + 0.1 * (i + k) as f64).collect();
            let mut lambda = 0.0;
            for _ in 0..20000 {
                let w: Vec<f64> = (0..d)
                    .map(|i| (0..d).map(|j| a[i][j] * v[j]).sum())
                    .collect();
                let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 {
                    break;
                }
                let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
                let diff: f64 = next
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                v = next;
                lambda = norm;
                if diff < 1e-15 {
                    break;
                }
            }
            for i in 0..d {
                for j in 0..d {
                    a[i][j] -= lambda * v[i] * v[j];
                }
            }
            values.push(lambda);
            vectors.push(v);
        }
        (values, vectors)
    }

    #[test]
    fn axis_aligned_variance() {
        let x = Matrix::from_rows(&[vec![1.0, 5.0], vec![-1.0, 5.0], vec![3.0, 5.0]]).unwrap();
        let p = fit_pca(&x).unwrap();
        assert_eq!(p.first_component_weights(), vec![1.0, 0.0]);
    }

    #[test]
    fn diagonal_covariance() {
        // Rows chosen so the sample covariance is exactly [[2,0],[0,1]].
        let s = 2f64.sqrt();
        let x = Matrix::from_rows(&[
            vec![s, 1.0 / s],
            vec![-s, 1.0 / s],
            vec![s, -1.0 / s],
            vec![-s, -1.0 / s],
        ])
        .unwrap();
        let p = fit_pca(&x).unwrap();
        assert!((p.explained_variance[0] - 8.0 / 3.0).abs() < 1e-12);
        assert!((p.explained_variance[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((p.loadings.get(0, 0).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_power_iteration() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = 2 + (seed as usize % 4);
            let mix: Vec<Vec<f64>> = (0..d)
                .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let rows: Vec<Vec<f64>> = (0..60)
                .map(|_| {
                    let z: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                    (0..d)
                        .map(|j| (0..d).map(|k| z[k] * mix[k][j]).sum())
                        .collect()
                })
                .collect();
            let x = Matrix::from_rows(&rows).unwrap();
            let p = fit_pca(&x).unwrap();
            let (values, vectors) = power_eigen(&covariance(&x));
            for k in 0..d {
                assert!(
                    (p.explained_variance[k] - values[k]).abs() < 1e-6,
                    "seed {seed} value {k}"
                );
                let dot: f64 = (0..d).map(|i| p.loadings.get(i, k) * vectors[k][i]).sum();
                assert!(
                    (dot.abs() - 1.0).abs() < 1e-6,
                    "seed {seed} vector {k}: {dot}"
                );
            }
        }
    }

    #[test]
    fn loadings_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..6).map(|_| rng.random()).collect())
            .collect();
        let p = fit_pca(&Matrix::from_rows(&rows).unwrap()).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                let dot: f64 = (0..6)
                    .map(|i| p.loadings.get(i, a) * p.loadings.get(i, b))
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-8);
            }
        }
        assert!(p.explained_variance.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn constant_data_gives_zero_weights() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(
            fit_pca(&x).unwrap().first_component_weights(),
            vec![0.0, 0.0]
        );
    }
}
