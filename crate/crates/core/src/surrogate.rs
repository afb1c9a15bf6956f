//! Weighted corrupted-label views of experimental data.
//!
//! With `s = y t / Q`, the responder misclassification loss of a classifier
//! `f` is, up to an `f`-independent constant, the mean of
//! `|s - 2θ| · 1{f(x) ≠ sign(s - 2θ)}`. [`to_surrogate`] materializes the
//! labels `z = sign(s - 2θ)` and weights `w = |s - 2θ|` so that any
//! sample-weighted classifier can be trained on them.
//!
//! [`pseudo_population`] instead reweights each row by `1/Q`, which makes
//! treatment look like a fair coin within every propensity stratum; the
//! generative learner is fit on `z = y t` under those weights.

use crate::data::{Dataset, Sign, Theta};
use crate::error::{Error, Result};

/// One `(x, z, w)` triple.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurrogateExample<'a> {
    pub x: &'a [f64],
    pub z: Sign,
    pub w: f64,
}

/// Feature rows with a ±1 label and nonnegative weight each.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedExamples {
    d: usize,
    features: Vec<f64>,
    labels: Vec<Sign>,
    weights: Vec<f64>,
}

impl WeightedExamples {
    pub fn new(d: usize, features: Vec<f64>, labels: Vec<Sign>, weights: Vec<f64>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::LengthMismatch { left: labels.len(), right: weights.len() });
        }
        if features.len() != labels.len() * d {
            return Err(Error::DimensionMismatch { expected: labels.len() * d, found: features.len() });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidConfig(format!("example weight {w} must be finite and nonnegative")));
        }
        Ok(Self { d, features, labels, weights })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn label(&self, i: usize) -> Sign {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Sign] {
        &self.labels
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> SurrogateExample<'_> {
        SurrogateExample { x: self.row(i), z: self.labels[i], w: self.weights[i] }
    }

    pub fn iter(&self) -> impl Iterator<Item = SurrogateExample<'_>> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Rows at `indices`, in order, repeats allowed.
    pub fn subset(&self, indices: &[usize]) -> WeightedExamples {
        let mut features = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        WeightedExamples {
            d: self.d,
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            weights: indices.iter().map(|&i| self.weights[i]).collect(),
        }
    }

    /// Same rows with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> WeightedExamples {
        WeightedExamples { weights: self.weights.iter().map(|w| w * factor).collect(), ..self.clone() }
    }
}

/// Surrogate label and weight for one row's signal `s = y t / Q`.
///
/// The tie `s = 2θ` gets `z = +1`; its weight is zero, so the label is inert.
pub fn surrogate_label(signal: f64, theta: Theta) -> (Sign, f64) {
    let shifted = signal - 2.0 * theta.value();
    (Sign::of(shifted), shifted.abs())
}

/// Builds the `(x, z, w)` representation of a dataset, preserving row order.
pub fn to_surrogate(ds: &Dataset, theta: Theta) -> WeightedExamples {
    let (labels, weights) = (0..ds.len()).map(|i| surrogate_label(ds.effect_signal(i), theta)).unzip();
    WeightedExamples { d: ds.dim(), features: ds.features().to_vec(), labels, weights }
}

/// Row index paired with its pseudo-population weight `1/Q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedObservation {
    pub row: usize,
    pub weight: f64,
}

/// Reweights every row by `1/Q`. Weights are left unnormalized.
pub fn pseudo_population(ds: &Dataset) -> Vec<WeightedObservation> {
    (0..ds.len()).map(|row| WeightedObservation { row, weight: 1.0 / ds.q(row) }).collect()
}

/// Training pairs for the generative learner: `z = y t` under `1/Q` weights.
pub fn generative_examples(ds: &Dataset) -> WeightedExamples {
    let (labels, weights) = pseudo_population(ds)
        .into_iter()
        .map(|p| (ds.outcome(p.row) * ds.treatment(p.row), p.weight))
        .unzip();
    WeightedExamples { d: ds.dim(), features: ds.features().to_vec(), labels, weights }
}

/// Unclamped balancing value `mean(y t / (2Q))`.
pub fn balancing_value(ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok((0..ds.len()).map(|i| ds.effect_signal(i)).sum::<f64>() / (2.0 * ds.len() as f64))
}

/// The θ at which always predicting +1 and always predicting -1 have the
/// same estimated loss, clamped into `[0, 1]`.
///
/// Under `Q = 1/2` this is the sample mean of `z = y t`.
pub fn balanced_theta(ds: &Dataset) -> Result<Theta> {
    balancing_value(ds).map(Theta::clamped)
}

/// How a run picks θ: a fixed value or the data's balancing value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThetaMode {
    Fixed(Theta),
    Balanced,
}

impl ThetaMode {
    pub fn resolve(self, ds: &Dataset) -> Result<Theta> {
        match self {
            ThetaMode::Fixed(theta) => Ok(theta),
            ThetaMode::Balanced => balanced_theta(ds),
        }
    }
}

impl Default for ThetaMode {
    fn default() -> Self {
        ThetaMode::Fixed(Theta::HALF)
    }
}

impl std::fmt::Display for ThetaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ThetaMode::Fixed(theta) => write!(f, "{}", theta.value()),
            ThetaMode::Balanced => f.write_str("balanced"),
        }
    }
}

impl std::str::FromStr for ThetaMode {
    type Err = Error;

    /// `balanced` or a number in `[0, 1]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "balanced" {
            return Ok(ThetaMode::Balanced);
        }
        let value: f64 = s
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("theta must be `balanced` or a number, got `{s}`")))?;
        Theta::new(value).map(ThetaMode::Fixed)
    }
}
