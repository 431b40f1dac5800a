use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Linear-interpolation percentile of sorted data, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile bootstrap over row resamples. Resamples where the metric is
/// undefined are skipped; `None` when every resample was.
pub fn bootstrap_ci<F>(
    metric: F,
    scores: &[f64],
    labels: &[u8],
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<Option<(f64, f64)>>
where
    F: Fn(&[f64], &[u8]) -> Option<f64>,
{
    if n_boot < 100 {
        return Err(Error::invalid("bootstrap needs at least 100 resamples"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("confidence level must lie in (0, 1)"));
    }
    let n = scores.len();
    if n == 0 || labels.len() != n {
        return Err(Error::invalid(
            "bootstrap needs equal-length, non-empty inputs",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = Vec::with_capacity(n_boot);
    let (mut s, mut l) = (vec![0.0; n], vec![0u8; n]);
    for _ in 0..n_boot {
        for k in 0..n {
            let i = rng.random_range(0..n);
            s[k] = scores[i];
            l[k] = labels[i];
        }
        if let Some(v) = metric(&s, &l) {
            stats.push(v);
        }
    }
    if stats.is_empty() {
        return Ok(None);
    }
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok(Some((
        percentile(&stats, tail),
        percentile(&stats, 1.0 - tail),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn accuracy(s: &[f64], l: &[u8]) -> Option<f64> {
        let hits = s
            .iter()
            .zip(l)
            .filter(|(&s, &l)| u8::from(s >= 0.5) == l)
            .count();
        Some(hits as f64 / s.len() as f64)
    }

    #[test]
    fn perfect_predictions_give_degenerate_interval() {
        let s = [0.9, 0.1, 0.8, 0.2];
        let l = [1, 0, 1, 0];
        assert_eq!(
            bootstrap_ci(accuracy, &s, &l, 200, 0.95, 1).unwrap(),
            Some((1.0, 1.0))
        );
    }

    #[test]
    fn percentile_interpolates() {
        let v: Vec<f64> = (0..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.025), 2.5);
        assert_eq!(percentile(&v, 0.975), 97.5);
        assert_eq!(percentile(&[1.0, 2.0], 0.5), 1.5);
    }

    #[test]
    fn interval_usually_covers_estimate() {
        let mut covered = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
            let l: Vec<u8> = (0..60).map(|_| rng.random_range(0..2)).collect();
            let s: Vec<f64> = l
                .iter()
                .map(|&y| f64::from(y) * 0.3 + rng.random::<f64>() * 0.7)
                .collect();
            let est = accuracy(&s, &l).unwrap();
            let (lo, hi) = bootstrap_ci(accuracy, &s, &l, 200, 0.95, seed)
                .unwrap()
                .unwrap();
            if lo <= est && est <= hi {
                covered += 1;
            }
        }
        assert!(covered >= 99, "{covered}");
    }

    #[test]
    fn deterministic_per_seed() {
        let s = [0.9, 0.4, 0.6, 0.2, 0.7];
        let l = [1, 0, 1, 0, 0];
        let a = bootstrap_ci(accuracy, &s, &l, 100, 0.9, 3).unwrap();
        assert_eq!(a, bootstrap_ci(accuracy, &s, &l, 100, 0.9, 3).unwrap());
        assert!(bootstrap_ci(accuracy, &s, &l, 99, 0.9, 3).is_err());
    }
}
