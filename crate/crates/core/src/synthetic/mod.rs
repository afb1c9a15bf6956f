//! Synthetic scenarios with full ground truth.
//!
//! Features are standard normal and treatment is a fair coin. Each unit
//! draws a responder label `R ~ ±Bernoulli(ρ(x))` and a non-responder
//! outcome `A ~ ±Bernoulli(α(x))`; the observed outcome is `T` for
//! responders and `A` otherwise.
//!
//! * Linear: `ρ = 0.15 + 0.7·1{x₁ > 0}`, `α = 1 - B(C(‖x‖²))`.
//! * Spherical: `ρ = B(C(‖x‖²))`, `α = 0.15 + 0.7·1{XOR_j (x_{2j-1} + x_{2j} > 0)}`.
//!
//! Here `B` is the Beta(4,4) CDF and `C` the chi-squared CDF with `d`
//! degrees of freedom, so `C(‖x‖²)` is uniform and `B(C(‖x‖²))` is a
//! smooth radial probability.

mod cdf;

pub use cdf::{beta44_cdf, chisq_cdf};

use rand::Rng;

use crate::data::{Dataset, GroundTruthUnit, Propensity, Sign, Theta};
use crate::error::{Error, Result};
use crate::rng::{seeded, NormalSampler};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    Linear,
    Spherical,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Linear => "linear",
            ScenarioKind::Spherical => "spherical",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(ScenarioKind::Linear),
            "spherical" => Ok(ScenarioKind::Spherical),
            other => Err(Error::InvalidConfig(format!("unknown scenario {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub d: usize,
    pub n: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, d: usize, n: usize, seed: u64) -> Result<Self> {
        let spec = Self { kind, d, n, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.d == 0 {
            return Err(Error::InvalidConfig("d must be at least 1".into()));
        }
        if self.kind == ScenarioKind::Spherical && self.d % 2 != 0 {
            return Err(Error::InvalidConfig("spherical requires even d".into()));
        }
        Ok(())
    }

    /// Same scenario with a different sample size and seed.
    pub fn with_draw(&self, n: usize, seed: u64) -> ScenarioSpec {
        ScenarioSpec { n, seed, ..*self }
    }
}

fn radial_probability(x: &[f64]) -> f64 {
    let sq: f64 = x.iter().map(|v| v * v).sum();
    beta44_cdf(chisq_cdf(sq, x.len()))
}

fn step(on: bool) -> f64 {
    if on {
        0.85
    } else {
        0.15
    }
}

/// Responder probability `ρ(x)` and type-2 non-responder probability `α(x)`.
pub fn rho_alpha(x: &[f64], spec: &ScenarioSpec) -> Result<(f64, f64)> {
    if x.len() != spec.d {
        return Err(Error::DimensionMismatch { expected: spec.d, found: x.len() });
    }
    match spec.kind {
        ScenarioKind::Linear => Ok((step(x[0] > 0.0), 1.0 - radial_probability(x))),
        ScenarioKind::Spherical => {
            if spec.d % 2 != 0 {
                return Err(Error::InvalidConfig("spherical requires even d".into()));
            }
            let parity = x.chunks_exact(2).filter(|pair| pair[0] + pair[1] > 0.0).count() % 2 == 1;
            Ok((radial_probability(x), step(parity)))
        }
    }
}

/// Bayes-optimal label `sign(ρ(x) - θ)`, ties to +1.
pub fn bayes_label(x: &[f64], spec: &ScenarioSpec, theta: Theta) -> Result<Sign> {
    let (rho, _) = rho_alpha(x, spec)?;
    Ok(Sign::of(rho - theta.value()))
}

fn bernoulli_sign<R: Rng>(rng: &mut R, p: f64) -> Sign {
    if rng.gen::<f64>() < p {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

/// Draws `spec.n` units. Returns the observable dataset (propensity 1/2)
/// and the matching ground truth, row for row.
pub fn generate(spec: &ScenarioSpec) -> Result<(Dataset, Vec<GroundTruthUnit>)> {
    spec.validate()?;
    let mut rng = seeded(spec.seed);
    let mut normal = NormalSampler::new();
    let mut features = Vec::with_capacity(spec.n * spec.d);
    let mut treatment = Vec::with_capacity(spec.n);
    let mut outcome = Vec::with_capacity(spec.n);
    let mut truth = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let x: Vec<f64> = (0..spec.d).map(|_| normal.sample(&mut rng)).collect();
        let t = if rng.gen::<bool>() { Sign::Pos } else { Sign::Neg };
        let (rho, alpha) = rho_alpha(&x, spec)?;
        let r = bernoulli_sign(&mut rng, rho);
        let a = bernoulli_sign(&mut rng, alpha);
        let unit = GroundTruthUnit::from_draws(x, r, a);
        features.extend_from_slice(&unit.x);
        treatment.push(t);
        outcome.push(unit.outcome(t));
        truth.push(unit);
    }
    let ds = Dataset::from_signs(spec.d, features, treatment, outcome, Propensity::Constant(0.5))?;
    Ok((ds, truth))
}

/// Feature rows only, for scoring classifiers on fresh points.
pub fn sample_features(d: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded(seed);
    let mut normal = NormalSampler::new();
    (0..n).map(|_| (0..d).map(|_| normal.sample(&mut rng)).collect()).collect()
}
