//! Fully connected networks for RespNet/RespLR, trained with Adam.
//!
//! Interior layers use ELU activations. The last layer has a single unit
//! whose pre-activation `a` is the score; the [`Head`] decides whether the
//! network reports `a` itself or `σ(a)`. With no hidden layers the network
//! is a linear model (the "LR" variants).
//!
//! Every objective is written as a function of the final pre-activation so
//! that the sigmoid never has to be inverted and the losses stay finite for
//! large scores.

use std::f64::consts::LN_2;

use rand::seq::SliceRandom;
use rand::Rng;

use super::scorer::LinearScorer;
use crate::data::Sign;
use crate::error::{Error, Result};
use crate::losses::{sigmoid, softplus};
use crate::rng::seeded;
use crate::surrogate::WeightedExamples;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Head {
    /// Output the score `h(x)`.
    Identity,
    /// Output the probability `σ(h(x))`.
    Sigmoid,
}

/// Per-example training loss, as a function of the final pre-activation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// `log(1 + e^a) - (1 + z) a / 2`; the discriminative surrogate, and also
    /// ordinary binary cross-entropy on a logit.
    Logistic,
    /// `-log((1 + z σ(a)) / 2)`, the likelihood of the corrupted label.
    Generative,
}

impl Objective {
    pub fn loss(self, a: f64, z: Sign) -> f64 {
        match (self, z) {
            (Objective::Logistic, _) => softplus(-z.value() * a),
            (Objective::Generative, Sign::Neg) => LN_2 + softplus(a),
            (Objective::Generative, Sign::Pos) => LN_2 - ln_one_plus_sigmoid(a),
        }
    }

    /// Derivative of [`Objective::loss`] in `a`.
    pub fn grad(self, a: f64, z: Sign) -> f64 {
        match (self, z) {
            (Objective::Logistic, _) => -z.value() * sigmoid(-z.value() * a),
            (Objective::Generative, Sign::Neg) => sigmoid(a),
            (Objective::Generative, Sign::Pos) => {
                let rho = sigmoid(a);
                -rho * (1.0 - rho) / (1.0 + rho)
            }
        }
    }
}

/// `log(1 + σ(a))` without cancellation at either tail.
fn ln_one_plus_sigmoid(a: f64) -> f64 {
    // 1 + σ(a) = (2 + e^{-a}) / (1 + e^{-a}).
    if a >= 0.0 {
        let e = (-a).exp();
        LN_2 + (e / 2.0).ln_1p() - e.ln_1p()
    } else {
        let e = a.exp();
        (2.0 * e).ln_1p() - e.ln_1p()
    }
}

#[inline]
fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

#[inline]
fn elu_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        x.exp()
    }
}

/// A feed-forward network with all parameters in one flat vector.
///
/// Layer `l` maps `sizes[l]` inputs to `sizes[l+1]` outputs and stores its
/// weight matrix (row-major, `out × in`) followed by its bias.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpScorer {
    sizes: Vec<usize>,
    params: Vec<f64>,
    head: Head,
}

impl MlpScorer {
    /// All-zero network. `sizes` runs from the input dimension to 1.
    pub fn zeros(sizes: &[usize], head: Head) -> Result<MlpScorer> {
        if sizes.len() < 2 || sizes.iter().any(|&s| s == 0) || *sizes.last().unwrap() != 1 {
            return Err(Error::InvalidConfig(format!("layer sizes {sizes:?} must be nonzero and end in 1")));
        }
        let count = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(MlpScorer { sizes: sizes.to_vec(), params: vec![0.0; count], head })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot(sizes: &[usize], head: Head, seed: u64) -> Result<MlpScorer> {
        let mut net = MlpScorer::zeros(sizes, head)?;
        let mut rng = seeded(seed);
        let mut offset = 0;
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in &mut net.params[offset..offset + fan_in * fan_out] {
                *p = rng.gen_range(-limit..limit);
            }
            offset += fan_in * fan_out + fan_out;
        }
        Ok(net)
    }

    pub fn from_parts(sizes: Vec<usize>, params: Vec<f64>, head: Head) -> Result<MlpScorer> {
        let mut net = MlpScorer::zeros(&sizes, head)?;
        if params.len() != net.params.len() {
            return Err(Error::LengthMismatch { left: net.params.len(), right: params.len() });
        }
        net.params = params;
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Final pre-activation (the score or logit).
    pub fn score(&self, x: &[f64]) -> f64 {
        let mut current = x.to_vec();
        let mut offset = 0;
        let layers = self.num_layers();
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[offset..offset + n_in * n_out];
            let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let mut next: Vec<f64> =
                (0..n_out).map(|o| w[o * n_in..(o + 1) * n_in].iter().zip(&current).map(|(a, v)| a * v).sum::<f64>() + b[o]).collect();
            if l + 1 < layers {
                next.iter_mut().for_each(|v| *v = elu(*v));
            }
            current = next;
            offset += n_in * n_out + n_out;
        }
        current[0]
    }

    /// Head output: the score, or `σ(score)` for a probability head.
    pub fn output(&self, x: &[f64]) -> f64 {
        let a = self.score(x);
        match self.head {
            Head::Identity => a,
            Head::Sigmoid => sigmoid(a),
        }
    }

    /// The affine map of a network with no hidden layers.
    pub fn to_linear(&self) -> Option<LinearScorer> {
        (self.num_layers() == 1).then(|| LinearScorer {
            weights: self.params[..self.sizes[0]].to_vec(),
            bias: self.params[self.sizes[0]],
        })
    }

    /// Adds `scale · ∂loss(x)/∂params` to `grad` and returns the score.
    fn accumulate_gradient(&self, x: &[f64], objective: Objective, z: Sign, scale: f64, grad: &mut [f64]) -> f64 {
        let layers = self.num_layers();
        // Forward pass, keeping pre-activations and layer inputs.
        let mut inputs: Vec<Vec<f64>> = Vec::with_capacity(layers);
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(layers);
        let mut offsets = Vec::with_capacity(layers);
        let mut current = x.to_vec();
        let mut offset = 0;
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[offset..offset + n_in * n_out];
            let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let z_l: Vec<f64> =
                (0..n_out).map(|o| w[o * n_in..(o + 1) * n_in].iter().zip(&current).map(|(a, v)| a * v).sum::<f64>() + b[o]).collect();
            let next = if l + 1 < layers { z_l.iter().map(|&v| elu(v)).collect() } else { z_l.clone() };
            inputs.push(std::mem::replace(&mut current, next));
            pre.push(z_l);
            offsets.push(offset);
            offset += n_in * n_out + n_out;
        }
        let score = current[0];

        // Backward pass.
        let mut delta = vec![scale * objective.grad(score, z)];
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = offsets[l];
            let input = &inputs[l];
            for o in 0..n_out {
                let d = delta[o];
                let row = &mut grad[off + o * n_in..off + (o + 1) * n_in];
                for (g, v) in row.iter_mut().zip(input) {
                    *g += d * v;
                }
                grad[off + n_in * n_out + o] += d;
            }
            if l > 0 {
                let w = &self.params[off..off + n_in * n_out];
                let below = &pre[l - 1];
                delta = (0..n_in)
                    .map(|i| (0..n_out).map(|o| w[o * n_in + i] * delta[o]).sum::<f64>() * elu_grad(below[i]))
                    .collect();
            }
        }
        score
    }
}

/// Optimizer and schedule settings.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Minibatch size; `None` trains full-batch.
    pub batch_size: Option<usize>,
    pub seed: u64,
    /// Weight of the squared-parameter penalty.
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: Some(32),
            seed: 0,
            l2: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.batch_size == Some(0) {
            return Err(Error::InvalidConfig("batch size must be at least 1".into()));
        }
        if !(self.l2 >= 0.0) {
            return Err(Error::InvalidConfig(format!("l2 must be nonnegative, got {}", self.l2)));
        }
        Ok(())
    }
}

/// Mean weighted loss over `examples` plus the L2 penalty.
pub fn objective_value(net: &MlpScorer, examples: &WeightedExamples, objective: Objective, l2: f64) -> f64 {
    let data: f64 = examples.iter().map(|ex| ex.w * objective.loss(net.score(ex.x), ex.z)).sum();
    data / examples.len() as f64 + l2 * net.params.iter().map(|p| p * p).sum::<f64>()
}

/// Gradient of [`objective_value`] by backpropagation over `rows`.
pub fn objective_gradient(net: &MlpScorer, examples: &WeightedExamples, objective: Objective, l2: f64) -> Vec<f64> {
    let rows: Vec<usize> = (0..examples.len()).collect();
    let mut grad = vec![0.0; net.params.len()];
    batch_gradient(net, examples, &rows, objective, l2, &mut grad);
    grad
}

fn batch_gradient(
    net: &MlpScorer,
    examples: &WeightedExamples,
    rows: &[usize],
    objective: Objective,
    l2: f64,
    grad: &mut [f64],
) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let scale = 1.0 / rows.len() as f64;
    let mut loss = 0.0;
    for &i in rows {
        let ex = examples.get(i);
        let score = net.accumulate_gradient(ex.x, objective, ex.z, scale * ex.w, grad);
        loss += scale * ex.w * objective.loss(score, ex.z);
    }
    if l2 > 0.0 {
        for (g, p) in grad.iter_mut().zip(&net.params) {
            *g += 2.0 * l2 * p;
        }
        loss += l2 * net.params.iter().map(|p| p * p).sum::<f64>();
    }
    loss
}

/// Result of a training run.
#[derive(Clone, Debug)]
pub struct TrainedNet {
    pub net: MlpScorer,
    /// Full-data objective after the last epoch.
    pub final_loss: f64,
}

/// Runs Adam from `init`. Deterministic given `cfg.seed`.
pub fn train_from(
    init: MlpScorer,
    examples: &WeightedExamples,
    objective: Objective,
    cfg: &TrainConfig,
) -> Result<TrainedNet> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if examples.dim() != init.input_dim() {
        return Err(Error::DimensionMismatch { expected: init.input_dim(), found: examples.dim() });
    }
    let mut net = init;
    let n = examples.len();
    let batch = cfg.batch_size.unwrap_or(n).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seeded(cfg.seed ^ 0x5EED_0F_AD4A);
    let p = net.params.len();
    let (mut m, mut v, mut grad) = (vec![0.0; p], vec![0.0; p], vec![0.0; p]);
    let mut step = 0i32;
    for epoch in 0..cfg.epochs {
        if batch < n {
            order.shuffle(&mut rng);
        }
        for rows in order.chunks(batch) {
            let loss = batch_gradient(&net, examples, rows, objective, cfg.l2, &mut grad);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Numeric(format!("training diverged in epoch {epoch}: loss {loss}")));
            }
            step += 1;
            let c1 = 1.0 - cfg.beta1.powi(step);
            let c2 = 1.0 - cfg.beta2.powi(step);
            for k in 0..p {
                m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
                v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
                let m_hat = m[k] / c1;
                let v_hat = v[k] / c2;
                net.params[k] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
            }
        }
    }
    let final_loss = objective_value(&net, examples, objective, cfg.l2);
    if !final_loss.is_finite() {
        return Err(Error::Numeric(format!("final training loss is {final_loss}")));
    }
    Ok(TrainedNet { net, final_loss })
}

fn layer_sizes(d: usize, hidden: &[usize]) -> Vec<usize> {
    std::iter::once(d).chain(hidden.iter().copied()).chain(std::iter::once(1)).collect()
}

/// RespNet-disc (RespLR-disc with no hidden layers): weighted logistic
/// surrogate on `(x, z, w)` examples; the network outputs a score.
pub fn train_resp_disc(examples: &WeightedExamples, hidden: &[usize], cfg: &TrainConfig) -> Result<TrainedNet> {
    let init = MlpScorer::glorot(&layer_sizes(examples.dim(), hidden), Head::Identity, cfg.seed)?;
    train_from(init, examples, Objective::Logistic, cfg)
}

/// RespNet-gen (RespLR-gen with no hidden layers): maximum likelihood of
/// `z = y t` under pseudo-population weights; the network outputs `ρ̂(x)`.
pub fn train_resp_gen(examples: &WeightedExamples, hidden: &[usize], cfg: &TrainConfig) -> Result<TrainedNet> {
    let init = MlpScorer::glorot(&layer_sizes(examples.dim(), hidden), Head::Sigmoid, cfg.seed)?;
    train_from(init, examples, Objective::Generative, cfg)
}

/// Hidden layer widths `2d` and `d` used by the RespNet variants.
pub fn respnet_hidden(d: usize) -> Vec<usize> {
    vec![2 * d, d]
}
