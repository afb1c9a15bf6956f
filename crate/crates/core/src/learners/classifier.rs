use super::mlp::MlpScorer;
use super::scorer::{LinearScorer, Scorer};
use crate::data::{Sign, Theta};
use crate::error::{Error, Result};
use crate::losses::sigmoid;

/// Anything that maps a feature vector to a ±1 decision.
///
/// Implemented by [`ResponderClassifier`] and by plain closures, which is
/// handy for evaluating reference rules such as `sign(x₁)`.
pub trait Classify: Sync {
    fn classify(&self, x: &[f64]) -> Sign;

    /// Expected feature dimension, when the rule knows it.
    fn input_dim(&self) -> Option<usize> {
        None
    }
}

impl<F> Classify for F
where
    F: Fn(&[f64]) -> Sign + Sync,
{
    fn classify(&self, x: &[f64]) -> Sign {
        self(x)
    }
}

/// Estimated `P(Y = +1 | x, T = t)` for one treatment arm.
#[derive(Clone, Debug, PartialEq)]
pub enum OutcomeModel {
    /// `σ(w·x + b)`.
    Logistic(LinearScorer),
    /// Base rate used when an arm is empty or has a single outcome class.
    Constant(f64),
}

impl OutcomeModel {
    pub fn probability(&self, x: &[f64]) -> f64 {
        match self {
            OutcomeModel::Logistic(lin) => sigmoid(lin.score(x)),
            OutcomeModel::Constant(p) => *p,
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            OutcomeModel::Logistic(lin) => Some(lin.dim()),
            OutcomeModel::Constant(_) => None,
        }
    }
}

/// A trained responder rule. Every variant outputs ±1 with `sign(0) = +1`.
#[derive(Clone, Debug, PartialEq)]
pub enum ResponderClassifier {
    /// `sign(h(x))` for a discriminative scorer.
    ScoreThreshold(Scorer),
    /// `sign(ρ̂(x) - θ)` for a network with a sigmoid head.
    ProbThreshold { model: MlpScorer, theta: Theta },
    /// `sign(τ̂(x) - 2θ)` with `τ̂ = 2(p̂₊ - p̂₋)`.
    CatePlugin { treated: OutcomeModel, control: OutcomeModel, theta: Theta },
    /// Always the same answer.
    Constant(Sign),
}

impl ResponderClassifier {
    /// The real-valued quantity the rule thresholds: `h(x)`, `ρ̂(x) - θ`,
    /// `τ̂(x) - 2θ`, or `±1`.
    pub fn margin(&self, x: &[f64]) -> f64 {
        match self {
            ResponderClassifier::ScoreThreshold(s) => s.score(x),
            ResponderClassifier::ProbThreshold { model, theta } => model.output(x) - theta.value(),
            ResponderClassifier::CatePlugin { treated, control, theta } => {
                self::cate(treated, control, x) - 2.0 * theta.value()
            }
            ResponderClassifier::Constant(s) => s.value(),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            ResponderClassifier::ScoreThreshold(s) => Some(s.dim()),
            ResponderClassifier::ProbThreshold { model, .. } => Some(model.input_dim()),
            ResponderClassifier::CatePlugin { treated, control, .. } => treated.dim().or(control.dim()),
            ResponderClassifier::Constant(_) => None,
        }
    }
}

/// `τ̂(x) = 2 (p̂₊(x) - p̂₋(x))`.
pub fn cate(treated: &OutcomeModel, control: &OutcomeModel, x: &[f64]) -> f64 {
    2.0 * (treated.probability(x) - control.probability(x))
}

impl Classify for ResponderClassifier {
    fn classify(&self, x: &[f64]) -> Sign {
        Sign::of(self.margin(x))
    }

    fn input_dim(&self) -> Option<usize> {
        self.dim()
    }
}

/// Applies a rule to each row, checking dimensions first.
pub fn predict<C: Classify + ?Sized, X: AsRef<[f64]>>(classifier: &C, xs: &[X]) -> Result<Vec<Sign>> {
    if let Some(d) = classifier.input_dim() {
        if let Some(bad) = xs.iter().find(|x| x.as_ref().len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: bad.as_ref().len() });
        }
    }
    Ok(xs.iter().map(|x| classifier.classify(x.as_ref())).collect())
}
