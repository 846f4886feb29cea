//! Fully connected clustering network with a softmax head.
//!
//! Hidden layers use ReLU. Gradients are computed by hand for this fixed
//! architecture family and applied with Adam.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hidden widths used when none are configured.
pub const DEFAULT_HIDDEN: [usize; 2] = [1200, 1200];

/// One affine layer, `y = x W + b` with `W` stored `in × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    fn zeros_like(&self) -> Dense {
        Dense {
            weights: Array2::zeros(self.weights.raw_dim()),
            bias: Array1::zeros(self.bias.raw_dim()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MlpModel {
    layers: Vec<Dense>,
    /// Bumped on every parameter update so stale caches can be detected.
    generation: u64,
}

/// Equal when the parameters are; the update counter is ignored.
impl PartialEq for MlpModel {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

/// Row-stochastic N_B×K matrix of cluster probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchProbabilities(Array2<f64>);

impl BatchProbabilities {
    /// Validates that every row is a probability distribution (to 1e-9).
    pub fn new(probs: Array2<f64>) -> Result<Self> {
        for (i, row) in probs.rows().into_iter().enumerate() {
            let sum: f64 = row.sum();
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Shape(format!("row {i} is not a probability vector")));
            }
        }
        if probs.ncols() == 0 {
            return Err(Error::Shape("zero clusters".into()));
        }
        Ok(Self(probs))
    }

    #[cfg(test)]
    pub(crate) fn new_unchecked(probs: Array2<f64>) -> Self {
        Self(probs)
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn k(&self) -> usize {
        self.0.ncols()
    }

    /// Keeps only the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> BatchProbabilities {
        Self(self.0.select(Axis(0), rows))
    }
}

/// Activations saved by [`MlpModel::forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer; entry 0 is the batch itself.
    inputs: Vec<Array2<f64>>,
    probs: Array2<f64>,
    generation: u64,
}

/// Parameter gradients, one [`Dense`] per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn scale(&mut self, s: f64) {
        for g in &mut self.layers {
            g.weights *= s;
            g.bias *= s;
        }
    }

    /// All gradient entries flattened layer by layer, weights before biases.
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|g| g.weights.iter().chain(g.bias.iter()).copied())
            .collect()
    }
}

fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    out
}

impl MlpModel {
    /// Fan-in scaled uniform initialization, `U(-sqrt(6/fan_in), sqrt(6/fan_in))`,
    /// with zero biases.
    pub fn init(d: usize, hidden: &[usize], k: usize, seed: u64) -> Result<Self> {
        if d == 0 || k == 0 || hidden.contains(&0) {
            return Err(Error::InvalidConfig("layer widths must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut widths = vec![d];
        widths.extend_from_slice(hidden);
        widths.push(k);
        let layers = widths
            .windows(2)
            .map(|w| {
                let bound = init_bound(w[0]);
                Dense {
                    weights: Array2::from_shape_fn((w[0], w[1]), |_| {
                        rng.random_range(-bound..=bound)
                    }),
                    bias: Array1::zeros(w[1]),
                }
            })
            .collect();
        Ok(Self {
            layers,
            generation: 0,
        })
    }

    /// Builds a model from explicit layers; consecutive widths must chain.
    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("model needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.weights.ncols() {
                return Err(Error::Shape(format!("layer {i}: bias width mismatch")));
            }
            if l.weights.iter().chain(l.bias.iter()).any(|v| !v.is_finite()) {
                return Err(Error::Shape(format!("layer {i}: non-finite parameter")));
            }
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].weights.ncols() != pair[1].weights.nrows() {
                return Err(Error::Shape(format!(
                    "layer {} output width does not match layer {} input",
                    i,
                    i + 1
                )));
            }
        }
        Ok(Self {
            layers,
            generation: 0,
        })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.nrows()
    }

    pub fn k(&self) -> usize {
        self.layers.last().map_or(0, |l| l.weights.ncols())
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    fn check_input(&self, batch: &ArrayView2<'_, f64>) -> Result<()> {
        if batch.ncols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "batch has {} columns, model expects {}",
                batch.ncols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    fn logits_and_inputs(&self, batch: ArrayView2<'_, f64>) -> (Array2<f64>, Vec<Array2<f64>>) {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut x = batch.to_owned();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = x.dot(&layer.weights);
            z += &layer.bias;
            inputs.push(x);
            if i < last {
                z.mapv_inplace(|v| v.max(0.0));
            }
            x = z;
        }
        (x, inputs)
    }

    /// Cluster probabilities without keeping activations.
    pub fn predict(&self, batch: ArrayView2<'_, f64>) -> Result<BatchProbabilities> {
        self.check_input(&batch)?;
        let (logits, _) = self.logits_and_inputs(batch);
        Ok(BatchProbabilities(softmax_rows(&logits)))
    }

    pub fn forward(&self, batch: ArrayView2<'_, f64>) -> Result<(BatchProbabilities, ForwardCache)> {
        self.check_input(&batch)?;
        let (logits, inputs) = self.logits_and_inputs(batch);
        let probs = softmax_rows(&logits);
        let cache = ForwardCache {
            inputs,
            probs: probs.clone(),
            generation: self.generation,
        };
        Ok((BatchProbabilities(probs), cache))
    }

    /// Backpropagates `grad_probs` (dL/dp, N_B×K) through softmax and all layers.
    pub fn backward(&self, cache: &ForwardCache, grad_probs: &Array2<f64>) -> Result<Gradients> {
        if cache.generation != self.generation || cache.inputs.len() != self.layers.len() {
            return Err(Error::Shape(
                "forward cache does not belong to the current model parameters".into(),
            ));
        }
        if grad_probs.dim() != cache.probs.dim() {
            return Err(Error::Shape(format!(
                "upstream gradient {:?} does not match probabilities {:?}",
                grad_probs.dim(),
                cache.probs.dim()
            )));
        }
        // softmax: dz = p * (g - <g, p>)
        let mut delta = cache.probs.clone();
        Zip::from(delta.rows_mut())
            .and(grad_probs.rows())
            .for_each(|mut p, g| {
                let dot = p.dot(&g);
                Zip::from(&mut p).and(&g).for_each(|pk, &gk| *pk *= gk - dot);
            });

        let mut grads: Vec<Dense> = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.inputs[i];
            grads.push(Dense {
                weights: input.t().dot(&delta),
                bias: delta.sum_axis(Axis(0)),
            });
            if i > 0 {
                let mut upstream = delta.dot(&layer.weights.t());
                // input to layer i is relu output of layer i-1
                Zip::from(&mut upstream)
                    .and(input)
                    .for_each(|u, &a| {
                        if a <= 0.0 {
                            *u = 0.0;
                        }
                    });
                delta = upstream;
            }
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }

    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        let ck = Checkpoint::from_model(self);
        std::fs::write(path, serde_json::to_string(&ck)?)?;
        Ok(())
    }

    pub fn load_checkpoint(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let ck: Checkpoint = serde_json::from_str(&text)?;
        ck.into_model()
    }
}

fn init_bound(fan_in: usize) -> f64 {
    (6.0 / fan_in as f64).sqrt()
}

/// Free-function form of [`MlpModel::init`] with the default hidden widths.
pub fn init_model(d: usize, k: usize, seed: u64) -> Result<MlpModel> {
    MlpModel::init(d, &DEFAULT_HIDDEN, k, seed)
}

/// Adam optimizer state and hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step_count: u64,
    first_moment: Vec<Dense>,
    second_moment: Vec<Dense>,
}

impl AdamState {
    pub fn new(model: &MlpModel, learning_rate: f64) -> Self {
        let zeros: Vec<Dense> = model.layers.iter().map(Dense::zeros_like).collect();
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step_count: 0,
            first_moment: zeros.clone(),
            second_moment: zeros,
        }
    }
}

/// One bias-corrected Adam update of `model` in place.
pub fn adam_step(model: &mut MlpModel, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    if grads.layers.len() != model.layers.len()
        || grads
            .layers
            .iter()
            .zip(&model.layers)
            .any(|(g, l)| g.weights.dim() != l.weights.dim() || g.bias.dim() != l.bias.dim())
    {
        return Err(Error::Shape("gradient shapes do not match model".into()));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2, eps, lr) = (state.beta1, state.beta2, state.epsilon, state.learning_rate);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);

    let update = |param: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *param -= lr * m_hat / (v_hat.sqrt() + eps);
    };

    for (((layer, g), m), v) in model
        .layers
        .iter_mut()
        .zip(&grads.layers)
        .zip(&mut state.first_moment)
        .zip(&mut state.second_moment)
    {
        Zip::from(&mut layer.weights)
            .and(&g.weights)
            .and(&mut m.weights)
            .and(&mut v.weights)
            .for_each(|p, &g, m, v| update(p, g, m, v));
        Zip::from(&mut layer.bias)
            .and(&g.bias)
            .and(&mut m.bias)
            .and(&mut v.bias)
            .for_each(|p, &g, m, v| update(p, g, m, v));
    }
    model.generation += 1;
    Ok(())
}

/// Versioned JSON checkpoint layout.
#[derive(Debug, Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    layers: Vec<CheckpointLayer>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointLayer {
    inputs: usize,
    outputs: usize,
    /// Row-major `inputs × outputs`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

const CHECKPOINT_FORMAT: &str = "descluster-mlp";
const CHECKPOINT_VERSION: u32 = 1;

impl Checkpoint {
    fn from_model(model: &MlpModel) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            layers: model
                .layers
                .iter()
                .map(|l| CheckpointLayer {
                    inputs: l.weights.nrows(),
                    outputs: l.weights.ncols(),
                    weights: l.weights.iter().copied().collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
        }
    }

    fn into_model(self) -> Result<MlpModel> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(Error::Shape(format!(
                "unsupported checkpoint {} v{}",
                self.format, self.version
            )));
        }
        let layers = self
            .layers
            .into_iter()
            .map(|l| {
                let weights = Array2::from_shape_vec((l.inputs, l.outputs), l.weights)
                    .map_err(|e| Error::Shape(e.to_string()))?;
                Ok(Dense {
                    weights,
                    bias: Array1::from(l.bias),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MlpModel::from_layers(layers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn random_batch(n: usize, d: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = MlpModel::init(5, &[7, 6], 3, 11).unwrap();
        let b = MlpModel::init(5, &[7, 6], 3, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, MlpModel::init(5, &[7, 6], 3, 12).unwrap());
        for l in a.layers() {
            let bound = init_bound(l.weights.nrows());
            assert!(l.weights.iter().all(|w| w.abs() <= bound));
            assert!(l.bias.iter().all(|&b| b == 0.0));
        }
        assert_eq!(a.k(), 3);
    }

    #[test]
    fn single_cluster_is_certain() {
        let m = MlpModel::init(4, &[3], 1, 0).unwrap();
        let p = m.predict(random_batch(6, 4, 1).view()).unwrap();
        assert!(p.as_array().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn zero_parameters_give_uniform_rows() {
        let mut m = MlpModel::init(3, &[4], 5, 0).unwrap();
        for l in &mut m.layers {
            l.weights.fill(0.0);
        }
        let p = m.predict(random_batch(4, 3, 2).view()).unwrap();
        assert!(p.as_array().iter().all(|&v| (v - 0.2).abs() < 1e-15));
    }

    #[test]
    fn duplicate_rows_give_identical_outputs() {
        let m = MlpModel::init(3, &[8], 4, 5).unwrap();
        let x = array![[0.3, -1.0, 2.0], [0.3, -1.0, 2.0]];
        let p = m.predict(x.view()).unwrap();
        assert_eq!(p.as_array().row(0), p.as_array().row(1));
    }

    #[test]
    fn softmax_is_stable_for_huge_logits() {
        let p = softmax_rows(&array![[1000.0, 0.0], [-1000.0, 1000.0]]);
        assert!(p.iter().all(|v| v.is_finite()));
        assert!((p[[0, 0]] - 1.0).abs() < 1e-15 && p[[0, 1]] < 1e-300);
        assert!((p[[1, 1]] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let m = MlpModel::init(3, &[4], 2, 0).unwrap();
        assert!(m.forward(random_batch(2, 4, 0).view()).is_err());
    }

    #[test]
    fn backward_is_linear_in_upstream_gradient() {
        let m = MlpModel::init(3, &[4, 4], 2, 9).unwrap();
        let (p, cache) = m.forward(random_batch(5, 3, 9).view()).unwrap();
        let zero = m.backward(&cache, &Array2::zeros((p.n(), p.k()))).unwrap();
        assert!(zero.flatten().iter().all(|&g| g == 0.0));

        let g = random_batch(5, 2, 10);
        let single = m.backward(&cache, &g).unwrap().flatten();
        let double = m.backward(&cache, &(&g * 2.0)).unwrap().flatten();
        for (a, b) in single.iter().zip(&double) {
            assert!((2.0 * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn stale_cache_rejected() {
        let mut m = MlpModel::init(3, &[4], 2, 0).unwrap();
        let (p, cache) = m.forward(random_batch(2, 3, 0).view()).unwrap();
        let g = m.backward(&cache, &Array2::ones((p.n(), p.k()))).unwrap();
        let mut adam = AdamState::new(&m, 1e-3);
        adam_step(&mut m, &g, &mut adam).unwrap();
        assert!(m.backward(&cache, &Array2::ones((2, 2))).is_err());
        let (_, fresh) = m.forward(random_batch(2, 3, 0).view()).unwrap();
        assert!(m.backward(&fresh, &Array2::ones((3, 2))).is_err());
    }

    /// Smallest |pre-activation| over all hidden layers; finite differences
    /// are only meaningful away from ReLU kinks.
    pub(crate) fn kink_margin(m: &MlpModel, x: &Array2<f64>) -> f64 {
        let mut a = x.clone();
        let mut margin = f64::INFINITY;
        for l in &m.layers[..m.layers.len() - 1] {
            let z = a.dot(&l.weights) + &l.bias;
            margin = z.iter().fold(margin, |b, v| b.min(v.abs()));
            a = z.mapv(|v| v.max(0.0));
        }
        margin
    }

    /// Model with random biases and a batch at least 1e-4 from every kink.
    pub(crate) fn smooth_point(d: usize, hidden: &[usize], k: usize, n: usize, seed: u64) -> (MlpModel, Array2<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let mut m = MlpModel::init(d, hidden, k, rng.random()).unwrap();
            for l in &mut m.layers {
                l.bias.mapv_inplace(|_| rng.random_range(-0.5..0.5));
            }
            let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0));
            if kink_margin(&m, &x) > 1e-4 {
                return (m, x);
            }
        }
    }

    fn param_mut(m: &mut MlpModel, layer: usize, idx: usize) -> &mut f64 {
        let l = &mut m.layers[layer];
        let nw = l.weights.len();
        if idx < nw {
            &mut l.weights.as_slice_mut().unwrap()[idx]
        } else {
            &mut l.bias[idx - nw]
        }
    }

    /// Central differences in the same order as [`Gradients::flatten`].
    pub(crate) fn numeric_gradient(m: &mut MlpModel, loss: impl Fn(&MlpModel) -> f64, h: f64) -> Vec<f64> {
        let mut numeric = Vec::new();
        for li in 0..m.layers.len() {
            for idx in 0..m.layers[li].weights.len() + m.layers[li].bias.len() {
                let orig = *param_mut(m, li, idx);
                *param_mut(m, li, idx) = orig + h;
                let up = loss(m);
                *param_mut(m, li, idx) = orig - h;
                let down = loss(m);
                *param_mut(m, li, idx) = orig;
                numeric.push((up - down) / (2.0 * h));
            }
        }
        numeric
    }

    pub(crate) fn relative_error(a: &[f64], b: &[f64]) -> f64 {
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        norm(&diff) / norm(a).max(norm(b)).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn backward_matches_finite_differences() {
        // scalar loss: sum_ik c_ik p_ik with fixed random c
        for seed in 0..5 {
            let (mut m, x) = smooth_point(3, &[4, 4], 2, 6, seed);
            let c = random_batch(6, 2, 200 + seed);
            let loss = |m: &MlpModel| (m.predict(x.view()).unwrap().as_array() * &c).sum();
            let (_, cache) = m.forward(x.view()).unwrap();
            let analytic = m.backward(&cache, &c).unwrap().flatten();
            let numeric = numeric_gradient(&mut m, loss, 1e-5);
            let err = relative_error(&analytic, &numeric);
            assert!(err < 1e-4, "seed {seed}: rel err {err}");
        }
    }

    #[test]
    fn adam_zero_gradient_is_fixed_point() {
        let mut m = MlpModel::init(3, &[4], 2, 1).unwrap();
        let before = m.clone();
        let zeros = Gradients {
            layers: m.layers.iter().map(Dense::zeros_like).collect(),
        };
        let mut st = AdamState::new(&m, 1e-3);
        adam_step(&mut m, &zeros, &mut st).unwrap();
        assert_eq!(m.layers, before.layers);
        assert_eq!(st.step_count, 1);
    }

    #[test]
    fn first_adam_step_moves_each_coordinate_by_learning_rate() {
        // m1 = (1-b1) g, v1 = (1-b2) g^2, so m_hat/sqrt(v_hat) = sign(g)
        // and the step is lr * |g| / (|g| + eps).
        let mut m = MlpModel::init(2, &[3], 2, 4).unwrap();
        let before = m.clone();
        let mut grads = Gradients {
            layers: m.layers.iter().map(Dense::zeros_like).collect(),
        };
        grads.layers[0].weights[[0, 0]] = 0.37;
        grads.layers[0].weights[[1, 2]] = -2.5;
        grads.layers[1].bias[1] = 1e-3;
        let mut st = AdamState::new(&m, 1e-3);
        adam_step(&mut m, &grads, &mut st).unwrap();
        let expect = |g: f64| -1e-3 * g / (g.abs() + 1e-8);
        let w0 = &m.layers[0].weights - &before.layers[0].weights;
        assert!((w0[[0, 0]] - expect(0.37)).abs() < 1e-15);
        assert!((w0[[1, 2]] - expect(-2.5)).abs() < 1e-15);
        assert_eq!(w0[[0, 1]], 0.0);
        let b1 = &m.layers[1].bias - &before.layers[1].bias;
        assert!((b1[1] - expect(1e-3)).abs() < 1e-15);
    }

    #[test]
    fn adam_replay_is_deterministic() {
        let run = || {
            let mut m = MlpModel::init(3, &[4], 2, 8).unwrap();
            let mut st = AdamState::new(&m, 1e-2);
            let x = random_batch(5, 3, 1);
            for _ in 0..2 {
                let (p, cache) = m.forward(x.view()).unwrap();
                let g = m.backward(&cache, &p.as_array().mapv(|v| v - 0.5)).unwrap();
                adam_step(&mut m, &g, &mut st).unwrap();
            }
            (m, st)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn checkpoint_round_trip() {
        let m = MlpModel::init(4, &[5, 3], 2, 77).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        m.save_checkpoint(&path).unwrap();
        let loaded = MlpModel::load_checkpoint(&path).unwrap();
        assert_eq!(loaded, m);
        assert_eq!(loaded.layers(), m.layers());
    }
}
