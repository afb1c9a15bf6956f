//! Pointwise losses and the weighted empirical risk.
//!
//! Score-based losses ([`hinge`], [`logistic_surrogate`]) take a real score
//! `h(x)`; probability-based losses ([`generative_nll`], [`wce`],
//! [`adjusted_nll`]) take `ρ(x) ∈ [0, 1]`, clamped to `[ε, 1 - ε]`.

use std::f64::consts::LN_2;

use crate::data::Sign;
use crate::error::{Error, Result};
use crate::surrogate::WeightedExamples;

/// Probability clamp for the log-based losses.
pub const PROB_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LossKind {
    Hinge,
    LogisticSurrogate,
    GenerativeNll,
    Wce,
    AdjustedNll,
    /// 1 when `sign(score)` disagrees with the label, else 0.
    ZeroOne,
}

impl LossKind {
    pub fn eval(self, value: f64, z: Sign) -> f64 {
        match self {
            LossKind::Hinge => hinge(value, z),
            LossKind::LogisticSurrogate => logistic_surrogate(value, z),
            LossKind::GenerativeNll => generative_nll(value, z),
            LossKind::Wce => wce(value, z),
            LossKind::AdjustedNll => adjusted_nll(value, z),
            LossKind::ZeroOne => zero_one(value, z),
        }
    }
}

/// `log(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn clamp_prob(rho: f64) -> f64 {
    rho.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

pub fn hinge(score: f64, z: Sign) -> f64 {
    (1.0 - z.value() * score).max(0.0)
}

/// `log(1 + e^h) - (1 + z) h / 2`, which equals `softplus(-z h)`.
pub fn logistic_surrogate(score: f64, z: Sign) -> f64 {
    softplus(-z.value() * score)
}

/// `-log((1 + z ρ) / 2)`, the negative log-probability of the observed
/// corrupted label when the responder probability is `ρ`.
pub fn generative_nll(rho: f64, z: Sign) -> f64 {
    let rho = clamp_prob(rho);
    match z {
        Sign::Pos => LN_2 - rho.ln_1p(),
        Sign::Neg => LN_2 - (-rho).ln_1p(),
    }
}

/// Cross-entropy with the 3:1 surrogate weights, scaled by 1/3.
pub fn wce(rho: f64, z: Sign) -> f64 {
    let rho = clamp_prob(rho);
    match z {
        Sign::Pos => -rho.ln() / 3.0,
        Sign::Neg => -(-rho).ln_1p(),
    }
}

/// [`generative_nll`] with the constant `log 2` removed from the `z = -1` branch.
pub fn adjusted_nll(rho: f64, z: Sign) -> f64 {
    let shift = if z.is_pos() { 0.0 } else { LN_2 };
    generative_nll(rho, z) - shift
}

pub fn zero_one(score: f64, z: Sign) -> f64 {
    if Sign::of(score) == z {
        0.0
    } else {
        1.0
    }
}

/// `(1/n) Σ w_i · loss(value_i, z_i)`.
///
/// `values` holds scores for score-based kinds and probabilities for the
/// probability-based kinds. For the generative losses the example weights
/// are expected to be pseudo-population weights.
pub fn weighted_empirical_risk(examples: &WeightedExamples, values: &[f64], kind: LossKind) -> Result<f64> {
    if examples.len() != values.len() {
        return Err(Error::LengthMismatch { left: examples.len(), right: values.len() });
    }
    if examples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let total: f64 = examples.iter().zip(values).map(|(ex, &v)| ex.w * kind.eval(v, ex.z)).sum();
    Ok(total / examples.len() as f64)
}
