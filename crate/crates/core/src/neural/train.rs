use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::network::{loss_and_gradients, LayerGrad, NetworkParams, NetworkSpec, Optimizer};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Epochs without a monitor-loss improvement before training stops.
pub const PATIENCE: usize = 10;
const MONITOR_FRAC: f64 = 0.2;
const MOMENTUM: f64 = 0.9;
const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// Stratified 80/20 partition of row indices into (fit, monitor).
fn monitor_split(y: &[u8], seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut fit, mut monitor) = (Vec::new(), Vec::new());
    for class in [1u8, 0] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut rng);
        let k = (idx.len() as f64 * MONITOR_FRAC).round() as usize;
        let k = if idx.len() >= 2 {
            k.clamp(1, idx.len() - 1)
        } else {
            0
        };
        monitor.extend_from_slice(&idx[..k]);
        fit.extend_from_slice(&idx[k..]);
    }
    fit.sort_unstable();
    monitor.sort_unstable();
    (fit, monitor)
}

struct State {
    m: Vec<(Vec<f64>, Vec<f64>)>,
    v: Vec<(Vec<f64>, Vec<f64>)>,
    t: i32,
}

impl State {
    fn new(params: &NetworkParams) -> Self {
        let zeros: Vec<(Vec<f64>, Vec<f64>)> = params
            .layers
            .iter()
            .map(|l| {
                (
                    vec![0.0; l.weights.as_slice().len()],
                    vec![0.0; l.bias.len()],
                )
            })
            .collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }
}

fn step(params: &mut NetworkParams, grads: &[LayerGrad], spec: &NetworkSpec, state: &mut State) {
    state.t += 1;
    let lr = spec.learning_rate;
    let (bc1, bc2) = (1.0 - BETA1.powi(state.t), 1.0 - BETA2.powi(state.t));
    for (l, (layer, g)) in params.layers.iter_mut().zip(grads).enumerate() {
        let pairs = [
            (layer.weights.as_mut_slice(), g.weights.as_slice(), 0),
            (layer.bias.as_mut_slice(), g.bias.as_slice(), 1),
        ];
        for (w, g, part) in pairs {
            let (m, v) = if part == 0 {
                (&mut state.m[l].0, &mut state.v[l].0)
            } else {
                (&mut state.m[l].1, &mut state.v[l].1)
            };
            for k in 0..w.len() {
                match spec.optimizer {
                    Optimizer::Sgd => w[k] -= lr * g[k],
                    Optimizer::Momentum => {
                        m[k] = MOMENTUM * m[k] - lr * g[k];
                        w[k] += m[k];
                    }
                    Optimizer::Adaptive => {
                        m[k] = BETA1 * m[k] + (1.0 - BETA1) * g[k];
                        v[k] = BETA2 * v[k] + (1.0 - BETA2) * g[k] * g[k];
                        w[k] -= lr * (m[k] / bc1) / ((v[k] / bc2).sqrt() + EPS);
                    }
                }
            }
        }
    }
}

/// Mini-batch BCE training. A stratified 20% of the rows is held back to
/// monitor loss; the parameters with the lowest monitor loss are returned,
/// and training stops after `PATIENCE` epochs without improvement.
pub fn train(
    spec: &NetworkSpec,
    params: NetworkParams,
    x: &Matrix,
    y: &[u8],
) -> Result<NetworkParams> {
    spec.validate()?;
    if x.rows() != y.len() || x.cols() != spec.input_size() {
        return Err(Error::invalid(
            "training data does not match the network shape",
        ));
    }
    let pos = y.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::invalid("network training needs both classes"));
    }
    let (fit, monitor) = monitor_split(y, spec.seed);
    let (x_fit, y_fit) = (
        x.select_rows(&fit),
        fit.iter().map(|&i| y[i]).collect::<Vec<_>>(),
    );
    let (x_mon, y_mon) = (
        x.select_rows(&monitor),
        monitor.iter().map(|&i| y[i]).collect::<Vec<_>>(),
    );
    let monitor_loss = |p: &NetworkParams| {
        if monitor.is_empty() {
            loss_and_gradients(p, &x_fit, &y_fit).0
        } else {
            loss_and_gradients(p, &x_mon, &y_mon).0
        }
    };

    let mut params = params;
    let mut best = params.clone();
    let mut log = super::TrainingLog::default();
    let mut best_loss = monitor_loss(&params);
    log.monitor_loss.push(best_loss);
    let mut state = State::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..fit.len()).collect();
    let mut stale = 0;
    for epoch in 1..=spec.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(spec.batch_size) {
            let xb = x_fit.select_rows(batch);
            let yb: Vec<u8> = batch.iter().map(|&i| y_fit[i]).collect();
            let (loss, grads) = loss_and_gradients(&params, &xb, &yb);
            if !loss.is_finite() || grads.iter().any(|g| !g.weights.all_finite()) {
                return Err(Error::Divergence { epoch });
            }
            epoch_loss += loss * batch.len() as f64;
            step(&mut params, &grads, spec, &mut state);
        }
        let mon = monitor_loss(&params);
        if !mon.is_finite() || !params.all_finite() {
            return Err(Error::Divergence { epoch });
        }
        log.train_loss.push(epoch_loss / fit.len() as f64);
        log.monitor_loss.push(mon);
        if mon < best_loss {
            best_loss = mon;
            best = params.clone();
            log.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= PATIENCE {
                break;
            }
        }
    }
    best.log = log;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::super::network::{forward, init_custom, Activation};
    use super::*;
    use rand::Rng;

    fn toy(n: usize) -> (Matrix, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let l = u8::from(i % 3 == 0);
            let c = if l == 1 { 1.0 } else { -1.0 };
            rows.push(vec![
                c + rng.random_range(-0.5..0.5),
                rng.random_range(-1.0..1.0),
            ]);
            y.push(l);
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    fn spec(optimizer: Optimizer, lr: f64) -> NetworkSpec {
        NetworkSpec {
            layer_sizes: vec![2, 4, 1],
            activation: Activation::Tanh,
            optimizer,
            learning_rate: lr,
            batch_size: 16,
            epochs: 60,
            seed: 3,
        }
    }

    #[test]
    fn separable_toy_improves_monitor_loss() {
        let (x, y) = toy(120);
        for (opt, lr) in [
            (Optimizer::Sgd, 0.5),
            (Optimizer::Momentum, 0.05),
            (Optimizer::Adaptive, 0.01),
        ] {
            let s = spec(opt, lr);
            let p = train(&s, init_custom(&s, &[1, 1]).unwrap(), &x, &y).unwrap();
            let log = &p.log;
            assert!(
                log.monitor_loss[log.best_epoch] < log.monitor_loss[0],
                "{opt:?}"
            );
            let acc = forward(&p, &x)
                .iter()
                .zip(&y)
                .filter(|(&p, &l)| u8::from(p >= 0.5) == l)
                .count();
            assert!(acc as f64 / 120.0 > 0.9, "{opt:?}");
        }
    }

    #[test]
    fn monitor_split_is_stratified() {
        let y: Vec<u8> = (0..50).map(|i| u8::from(i < 10)).collect();
        let (fit, mon) = monitor_split(&y, 1);
        assert_eq!(mon.len(), 10);
        assert_eq!(mon.iter().filter(|&&i| y[i] == 1).count(), 2);
        assert_eq!(fit.len() + mon.len(), 50);
    }

    #[test]
    fn huge_learning_rate_reports_divergence_or_stays_finite() {
        let (x, y) = toy(60);
        let mut s = spec(Optimizer::Momentum, 1e308);
        s.activation = Activation::Relu;
        match train(&s, init_custom(&s, &[1, 1]).unwrap(), &x, &y) {
            Err(Error::Divergence { epoch }) => assert!(epoch >= 1),
            Ok(p) => assert!(p.all_finite()),
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn deterministic() {
        let (x, y) = toy(60);
        let s = spec(Optimizer::Adaptive, 0.01);
        let a = train(&s, init_custom(&s, &[2, 1]).unwrap(), &x, &y).unwrap();
        let b = train(&s, init_custom(&s, &[2, 1]).unwrap(), &x, &y).unwrap();
        assert_eq!(a, b);
    }
}
