use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{sigmoid, Matrix};

pub const LOGIT_CLAMP: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    /// Heavy-ball momentum, coefficient 0.9.
    Momentum,
    /// Adam with the usual (0.9, 0.999, 1e-8).
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// Input width, hidden widths, then 1.
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.layer_sizes.len();
        if n < 3 {
            return Err(Error::invalid("a network needs at least one hidden layer"));
        }
        if self.layer_sizes[n - 1] != 1 {
            return Err(Error::invalid("the output layer must have width 1"));
        }
        if self.layer_sizes.contains(&0) {
            return Err(Error::invalid("layer widths must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        Ok(())
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }
}

/// `weights` is `fan_in x fan_out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingLog {
    /// Mean BCE on the fitting rows after each epoch.
    pub train_loss: Vec<f64>,
    /// Mean BCE on the monitor rows; entry 0 is before training.
    pub monitor_loss: Vec<f64>,
    /// Index into `monitor_loss` of the returned parameters.
    pub best_epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub layers: Vec<Layer>,
    pub activation: Activation,
    pub log: TrainingLog,
}

impl NetworkParams {
    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.all_finite() && l.bias.iter().all(|b| b.is_finite()))
    }
}

fn glorot_draw(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize, limit: f64) -> Matrix {
    let data = (0..fan_in * fan_out)
        .map(|_| rng.random_range(-limit..=limit))
        .collect();
    Matrix::from_vec(fan_in, fan_out, data).expect("shape matches draw count")
}

/// Glorot-uniform layers, except the first uses fan-in `sum(importance)` and
/// scales row `f` by `importance_f / mean(importance)`.
pub fn init_custom(spec: &NetworkSpec, importance: &[u32]) -> Result<NetworkParams> {
    spec.validate()?;
    if importance.len() != spec.input_size() {
        return Err(Error::invalid(format!(
            "{} importance counts for {} inputs",
            importance.len(),
            spec.input_size()
        )));
    }
    if importance.contains(&0) {
        return Err(Error::invalid("importance counts must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_eff: f64 = importance.iter().map(|&c| f64::from(c)).sum();
    let mean = n_eff / importance.len() as f64;
    let mut layers = Vec::with_capacity(spec.layer_sizes.len() - 1);
    for (l, pair) in spec.layer_sizes.windows(2).enumerate() {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let mut weights = if l == 0 {
            let limit = (6.0 / (n_eff + fan_out as f64)).sqrt();
            glorot_draw(&mut rng, fan_in, fan_out, limit)
        } else {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            glorot_draw(&mut rng, fan_in, fan_out, limit)
        };
        if l == 0 {
            for (f, &c) in importance.iter().enumerate() {
                let m = f64::from(c) / mean;
                weights.row_mut(f).iter_mut().for_each(|w| *w *= m);
            }
        }
        layers.push(Layer {
            weights,
            bias: vec![0.0; fan_out],
        });
    }
    Ok(NetworkParams {
        layers,
        activation: spec.activation,
        log: TrainingLog::default(),
    })
}

/// Per-layer pre-activations and activations for a batch, row-major.
struct Trace {
    z: Vec<Vec<f64>>,
    a: Vec<Vec<f64>>,
}

fn run(params: &NetworkParams, x: &Matrix) -> Trace {
    let n = x.rows();
    let mut z_all = Vec::with_capacity(params.layers.len());
    let mut a_all: Vec<Vec<f64>> = Vec::with_capacity(params.layers.len());
    let last = params.layers.len() - 1;
    for (l, layer) in params.layers.iter().enumerate() {
        let input: &[f64] = if l == 0 { x.as_slice() } else { &a_all[l - 1] };
        let (fan_in, fan_out) = (layer.weights.rows(), layer.weights.cols());
        let w = layer.weights.as_slice();
        let mut z = vec![0.0; n * fan_out];
        for i in 0..n {
            let out = &mut z[i * fan_out..(i + 1) * fan_out];
            out.copy_from_slice(&layer.bias);
            let row = &input[i * fan_in..(i + 1) * fan_in];
            for (k, &v) in row.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                for (o, &wk) in out.iter_mut().zip(&w[k * fan_out..(k + 1) * fan_out]) {
                    *o += v * wk;
                }
            }
        }
        let a = if l == last {
            z.iter()
                .map(|&v| v.clamp(-LOGIT_CLAMP, LOGIT_CLAMP))
                .collect()
        } else {
            z.iter().map(|&v| params.activation.apply(v)).collect()
        };
        z_all.push(z);
        a_all.push(a);
    }
    Trace { z: z_all, a: a_all }
}

/// Class-1 probabilities. Logits are clamped to `±LOGIT_CLAMP`.
pub fn forward(params: &NetworkParams, x: &Matrix) -> Vec<f64> {
    let trace = run(params, x);
    trace
        .a
        .last()
        .unwrap()
        .iter()
        .map(|&l| sigmoid(l))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Mean binary cross-entropy over the rows and its gradient per layer.
pub fn loss_and_gradients(params: &NetworkParams, x: &Matrix, y: &[u8]) -> (f64, Vec<LayerGrad>) {
    let n = x.rows();
    let trace = run(params, x);
    let logits = trace.a.last().unwrap();
    let inv_n = 1.0 / n as f64;
    let mut loss = 0.0;
    // dL/dz at the output is p - y (per row, divided by n).
    let mut delta: Vec<f64> = Vec::with_capacity(n);
    for (&m, &l) in logits.iter().zip(y) {
        let softplus = if m > 0.0 {
            m + (-m).exp().ln_1p()
        } else {
            m.exp().ln_1p()
        };
        loss += softplus - f64::from(l) * m;
        delta.push((sigmoid(m) - f64::from(l)) * inv_n);
    }
    let mut grads: Vec<LayerGrad> = Vec::with_capacity(params.layers.len());
    for l in (0..params.layers.len()).rev() {
        let layer = &params.layers[l];
        let (fan_in, fan_out) = (layer.weights.rows(), layer.weights.cols());
        let input: &[f64] = if l == 0 {
            x.as_slice()
        } else {
            &trace.a[l - 1]
        };
        let mut gw = vec![0.0; fan_in * fan_out];
        let mut gb = vec![0.0; fan_out];
        for i in 0..n {
            let d = &delta[i * fan_out..(i + 1) * fan_out];
            for (b, &dv) in gb.iter_mut().zip(d) {
                *b += dv;
            }
            let row = &input[i * fan_in..(i + 1) * fan_in];
            for (k, &v) in row.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                for (g, &dv) in gw[k * fan_out..(k + 1) * fan_out].iter_mut().zip(d) {
                    *g += v * dv;
                }
            }
        }
        if l > 0 {
            let w = layer.weights.as_slice();
            let (z_prev, a_prev) = (&trace.z[l - 1], &trace.a[l - 1]);
            let mut next = vec![0.0; n * fan_in];
            for i in 0..n {
                let d = &delta[i * fan_out..(i + 1) * fan_out];
                for k in 0..fan_in {
                    let s: f64 = w[k * fan_out..(k + 1) * fan_out]
                        .iter()
                        .zip(d)
                        .map(|(a, b)| a * b)
                        .sum();
                    let idx = i * fan_in + k;
                    next[idx] = s * params.activation.derivative(z_prev[idx], a_prev[idx]);
                }
            }
            delta = next;
        }
        grads.push(LayerGrad {
            weights: Matrix::from_vec(fan_in, fan_out, gw).expect("gradient shape"),
            bias: gb,
        });
    }
    grads.reverse();
    (loss * inv_n, grads)
}

/// Input saliency `|W_1| |W_2| ... |W_m| 1` over the first `min(max_layers,
/// depth)` layers, normalized to sum 1.
pub fn extract_feature_weights(params: &NetworkParams, max_layers: usize) -> Vec<f64> {
    let m = max_layers.min(params.layers.len()).max(1);
    let mut acc = vec![1.0; params.layers[m - 1].weights.cols()];
    for layer in params.layers[..m].iter().rev() {
        let w = &layer.weights;
        acc = (0..w.rows())
            .map(|r| w.row(r).iter().zip(&acc).map(|(a, b)| a.abs() * b).sum())
            .collect();
    }
    crate::matrix::normalize_to_unit_sum(&acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn spec(sizes: &[usize], activation: Activation) -> NetworkSpec {
        NetworkSpec {
            layer_sizes: sizes.to_vec(),
            activation,
            optimizer: Optimizer::Sgd,
            learning_rate: 0.1,
            batch_size: 4,
            epochs: 10,
            seed: 42,
        }
    }

    fn manual(layers: Vec<(Vec<Vec<f64>>, Vec<f64>)>) -> NetworkParams {
        NetworkParams {
            layers: layers
                .into_iter()
                .map(|(w, b)| Layer {
                    weights: Matrix::from_rows(&w).unwrap(),
                    bias: b,
                })
                .collect(),
            activation: Activation::Relu,
            log: TrainingLog::default(),
        }
    }

    #[test]
    fn unit_importance_is_plain_glorot() {
        let s = spec(&[6, 4, 1], Activation::Tanh);
        let p = init_custom(&s, &[1; 6]).unwrap();
        let limit = (6.0f64 / 10.0).sqrt();
        assert!(p.layers[0]
            .weights
            .as_slice()
            .iter()
            .all(|w| w.abs() <= limit));
        // Same draw as an unscaled Glorot layer.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        assert_eq!(p.layers[0].weights, glorot_draw(&mut rng, 6, 4, limit));
    }

    #[test]
    fn importance_scales_rows() {
        let s = spec(&[6, 4, 1], Activation::Relu);
        let counts = [6, 1, 1, 1, 1, 1];
        let p = init_custom(&s, &counts).unwrap();
        let limit = (6.0f64 / (11.0 + 4.0)).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let base = glorot_draw(&mut rng, 6, 4, limit);
        for j in 0..4 {
            let want = base.get(0, j) * 36.0 / 11.0;
            assert!((p.layers[0].weights.get(0, j) - want).abs() < 1e-15);
            let want = base.get(1, j) * 6.0 / 11.0;
            assert!((p.layers[0].weights.get(1, j) - want).abs() < 1e-15);
        }
        assert_eq!(p, init_custom(&s, &counts).unwrap());
        assert!(init_custom(&s, &[1; 5]).is_err());
    }

    #[test]
    fn zero_network_outputs_half() {
        let p = manual(vec![(vec![vec![0.0], vec![0.0]], vec![0.0])]);
        let x = Matrix::from_rows(&[vec![3.0, -1.0], vec![1e6, 2.0]]).unwrap();
        assert_eq!(forward(&p, &x), vec![0.5, 0.5]);
    }

    #[test]
    fn single_layer_is_logistic() {
        let p = manual(vec![(vec![vec![0.7]], vec![-0.2])]);
        let x = Matrix::from_rows(&[vec![1.5]]).unwrap();
        assert!((forward(&p, &x)[0] - sigmoid(0.7 * 1.5 - 0.2)).abs() < 1e-15);
    }

    #[test]
    fn extreme_inputs_stay_finite() {
        let s = spec(&[2, 3, 1], Activation::Relu);
        let p = init_custom(&s, &[1, 1]).unwrap();
        let x = Matrix::from_rows(&[vec![1e6, -1e6], vec![-1e6, 1e6]]).unwrap();
        assert!(forward(&p, &x).iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn output_gradient_is_p_minus_y() {
        let p = manual(vec![(vec![vec![0.0]], vec![0.0])]);
        let x = Matrix::from_rows(&[vec![1.0]]).unwrap();
        let (_, g) = loss_and_gradients(&p, &x, &[1]);
        assert_eq!(g[0].bias[0], -0.5);
    }

    #[test]
    fn saliency_product() {
        let p = manual(vec![
            (vec![vec![1.0, 0.0], vec![0.0, -1.0]], vec![0.0, 0.0]),
            (vec![vec![-2.0], vec![1.0]], vec![0.0]),
        ]);
        let w = extract_feature_weights(&p, 5);
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15 && (w[1] - 1.0 / 3.0).abs() < 1e-15);
        let single = manual(vec![(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0])]);
        assert_eq!(extract_feature_weights(&single, 5), vec![0.5, 0.5]);
    }

    #[test]
    fn saliency_uses_at_most_the_network_depth() {
        let s = spec(&[3, 4, 4, 1], Activation::Tanh);
        let p = init_custom(&s, &[1, 2, 3]).unwrap();
        let w = extract_feature_weights(&p, 5);
        assert_eq!(w, extract_feature_weights(&p, 3));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_ne!(w, extract_feature_weights(&p, 1));
    }

    /// Central differences on every parameter, `h = 1e-5`.
    pub(crate) fn max_gradient_error(activation: Activation, seed: u64) -> f64 {
        let mut s = spec(&[4, 2, 1], activation);
        s.seed = seed;
        let mut p = init_custom(&s, &[1, 2, 1, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        for layer in &mut p.layers {
            layer
                .bias
                .iter_mut()
                .for_each(|b| *b = rng.random_range(-0.5..0.5));
        }
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<u8> = (0..8).map(|i| (i % 2) as u8).collect();
        let (_, grads) = loss_and_gradients(&p, &x, &y);
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for l in 0..p.layers.len() {
            let nw = p.layers[l].weights.as_slice().len();
            for k in 0..nw + p.layers[l].bias.len() {
                let numeric = {
                    let mut plus = p.clone();
                    let mut minus = p.clone();
                    if k < nw {
                        plus.layers[l].weights.as_mut_slice()[k] += h;
                        minus.layers[l].weights.as_mut_slice()[k] -= h;
                    } else {
                        plus.layers[l].bias[k - nw] += h;
                        minus.layers[l].bias[k - nw] -= h;
                    }
                    (loss_and_gradients(&plus, &x, &y).0 - loss_and_gradients(&minus, &x, &y).0)
                        / (2.0 * h)
                };
                let analytic = if k < nw {
                    grads[l].weights.as_slice()[k]
                } else {
                    grads[l].bias[k - nw]
                };
                let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max(err);
            }
        }
        worst
    }

    #[test]
    fn gradients_match_central_differences() {
        for activation in [Activation::Relu, Activation::Tanh, Activation::Sigmoid] {
            for seed in 0..3 {
                let err = max_gradient_error(activation, seed);
                assert!(err <= 1e-4, "{activation:?} seed {seed}: {err}");
            }
        }
    }
}
