//! Studentized (bootstrap-t) confidence intervals for the coefficients of
//! the linear generative model.
//!
//! The point estimate comes from the full data. Each outer resample is
//! refit, and its standard error comes from an inner bootstrap of that
//! resample; the t-statistics `(β*_b - β̂) / se*_b` give the quantiles, and
//! the full-data standard error is the spread of the outer estimates:
//!
//! ```text
//! [β̂ - t_(1-α/2) · se,  β̂ - t_(α/2) · se]
//! ```

use rand::Rng;
use rayon::prelude::*;

use super::replicate::percentile;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learners::mlp::{train_from, train_resp_gen, MlpScorer, Objective};
use crate::learners::TrainConfig;
use crate::rng::{child_seed, seeded};
use crate::surrogate::{generative_examples, WeightedExamples};

/// Resamples drawn before a degenerate one is given up.
pub const MAX_ATTEMPTS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapConfig {
    pub outer: usize,
    pub inner: usize,
    pub level: f64,
    pub seed: u64,
    pub train: TrainConfig,
    /// Start refits from the full-data estimate instead of a fresh
    /// initialization.
    pub warm_start: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { outer: 200, inner: 50, level: 0.95, seed: 0, train: TrainConfig::default(), warm_start: true }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer == 0 {
            return Err(Error::InvalidConfig("outer bootstrap needs at least one resample".into()));
        }
        if self.inner == 0 {
            return Err(Error::InvalidConfig("Studentization requires inner bootstrap".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidConfig(format!("level must lie in (0, 1), got {}", self.level)));
        }
        self.train.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientCi {
    /// Feature index, or `d` for the intercept.
    pub index: usize,
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl CoefficientCi {
    /// Whether the interval excludes zero.
    pub fn significant(&self) -> bool {
        self.lower > 0.0 || self.upper < 0.0
    }

    /// Studentized intervals need not contain the estimate; this flags it.
    pub fn contains_estimate(&self) -> bool {
        self.lower <= self.estimate && self.estimate <= self.upper
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapResult {
    pub intervals: Vec<CoefficientCi>,
    /// Outer resamples used.
    pub used: usize,
    /// Outer resamples dropped after repeated degenerate draws.
    pub skipped: usize,
}

/// Coefficients `(w_1, ..., w_d, b)` of a linear network.
fn coefficients(net: &MlpScorer) -> Vec<f64> {
    let linear = net.to_linear().expect("linear generative model");
    linear.weights.iter().copied().chain(std::iter::once(linear.bias)).collect()
}

struct Refitter<'a> {
    examples: &'a WeightedExamples,
    init: Option<&'a MlpScorer>,
    cfg: &'a TrainConfig,
}

impl Refitter<'_> {
    fn fit(&self, rows: &[usize], seed: u64) -> Result<Vec<f64>> {
        let sub = self.examples.subset(rows);
        let cfg = TrainConfig { seed, ..self.cfg.clone() };
        let trained = match self.init {
            Some(init) => train_from(init.clone(), &sub, Objective::Generative, &cfg)?,
            None => train_resp_gen(&sub, &[], &cfg)?,
        };
        Ok(coefficients(&trained.net))
    }

    /// Draws `from.len()` rows with replacement from `from`, redrawing up
    /// to [`MAX_ATTEMPTS`] times while the labels are all equal.
    fn resample(&self, from: &[usize], seed: u64) -> Option<(Vec<usize>, u64)> {
        for attempt in 0..MAX_ATTEMPTS as u64 {
            let s = child_seed(seed, &[attempt]);
            let mut rng = seeded(s);
            let rows: Vec<usize> = (0..from.len()).map(|_| from[rng.gen_range(0..from.len())]).collect();
            let first = self.examples.label(rows[0]);
            if rows.iter().any(|&r| self.examples.label(r) != first) {
                return Some((rows, s));
            }
        }
        None
    }
}

fn std_dev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return f64::NAN;
    }
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// One outer resample: its estimate and its inner-bootstrap standard errors.
struct OuterDraw {
    estimate: Vec<f64>,
    se: Vec<f64>,
}

pub fn bootstrap_ci(ds: &Dataset, cfg: &BootstrapConfig) -> Result<BootstrapResult> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let examples = generative_examples(ds);
    let all: Vec<usize> = (0..ds.len()).collect();
    let full_cfg = TrainConfig { seed: child_seed(cfg.seed, &[0]), ..cfg.train.clone() };
    let full = train_resp_gen(&examples, &[], &full_cfg)?;
    let beta_hat = coefficients(&full.net);
    let refit = Refitter { examples: &examples, init: cfg.warm_start.then_some(&full.net), cfg: &cfg.train };

    let draws: Vec<Option<OuterDraw>> = (0..cfg.outer)
        .into_par_iter()
        .map(|b| -> Result<Option<OuterDraw>> {
            let outer_seed = child_seed(cfg.seed, &[1, b as u64]);
            let Some((rows, s)) = refit.resample(&all, outer_seed) else { return Ok(None) };
            let estimate = refit.fit(&rows, child_seed(s, &[0]))?;
            let mut inner = Vec::with_capacity(cfg.inner);
            for j in 0..cfg.inner {
                if let Some((inner_rows, s2)) = refit.resample(&rows, child_seed(s, &[1, j as u64])) {
                    inner.push(refit.fit(&inner_rows, child_seed(s2, &[0]))?);
                }
            }
            if inner.len() < 2 {
                return Ok(None);
            }
            let se = (0..beta_hat.len())
                .map(|k| std_dev(&inner.iter().map(|v| v[k]).collect::<Vec<_>>()))
                .collect();
            Ok(Some(OuterDraw { estimate, se }))
        })
        .collect::<Result<_>>()?;
    let kept: Vec<OuterDraw> = draws.into_iter().flatten().collect();
    let skipped = cfg.outer - kept.len();
    if kept.len() < 2 {
        return Err(Error::Numeric(format!("only {} usable bootstrap resamples", kept.len())));
    }

    let alpha = 1.0 - cfg.level;
    let d = ds.dim();
    let intervals = (0..beta_hat.len())
        .map(|k| {
            let outer: Vec<f64> = kept.iter().map(|o| o.estimate[k]).collect();
            let se = std_dev(&outer);
            let t: Vec<f64> = kept
                .iter()
                .filter(|o| o.se[k] > 0.0)
                .map(|o| (o.estimate[k] - beta_hat[k]) / o.se[k])
                .collect();
            let (t_lo, t_hi) = (percentile(&t, alpha / 2.0), percentile(&t, 1.0 - alpha / 2.0));
            CoefficientCi {
                index: k,
                name: if k < d { format!("x{}", k + 1) } else { "intercept".into() },
                estimate: beta_hat[k],
                std_error: se,
                lower: beta_hat[k] - t_hi * se,
                upper: beta_hat[k] - t_lo * se,
                level: cfg.level,
            }
        })
        .collect();
    Ok(BootstrapResult { intervals, used: kept.len(), skipped })
}
