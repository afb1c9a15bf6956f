//! Monte Carlo replication: train on fresh synthetic draws, score against
//! the Bayes rule on independent test draws, and aggregate.

use rayon::prelude::*;

use super::estimators::{accuracy_vs_bayes, estimate_losses, policy_value};
use crate::data::Theta;
use crate::error::{Error, Result};
use crate::learners::{fit, LearnerConfig, LearnerKind};
use crate::rng::child_seed;
use crate::surrogate::ThetaMode;
use crate::synthetic::{generate, ScenarioKind, ScenarioSpec};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "RESPCLASS_THREADS";

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: ScenarioKind,
    pub d: usize,
    pub learners: Vec<LearnerKind>,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    /// Fresh points drawn for each replication's accuracy score.
    pub test_size: usize,
    pub theta: ThetaMode,
    pub learner: LearnerConfig,
}

impl ExperimentSpec {
    pub fn new(scenario: ScenarioKind, d: usize, learners: Vec<LearnerKind>, n_grid: Vec<usize>, replications: usize, seed: u64) -> Self {
        Self {
            scenario,
            d,
            learners,
            n_grid,
            replications,
            seed,
            test_size: 10_000,
            theta: ThetaMode::default(),
            learner: LearnerConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        ScenarioSpec::new(self.scenario, self.d, 1, 0)?;
        if self.learners.is_empty() {
            return Err(Error::InvalidConfig("no learners configured".into()));
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(Error::InvalidConfig("n grid must be nonempty and positive".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be at least 1".into()));
        }
        if self.test_size == 0 {
            return Err(Error::InvalidConfig("test size must be at least 1".into()));
        }
        self.learner.validate()
    }
}

/// Outcome of one (learner, n, replication) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationRecord {
    pub learner: LearnerKind,
    pub n: usize,
    pub replication: usize,
    /// Seed of the training draw (shared by all learners in the cell).
    pub data_seed: u64,
    pub theta: Theta,
    pub outcome: std::result::Result<Metrics, String>,
}

/// Scores of a trained classifier on the independent test draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub bayes_accuracy: f64,
    pub l_theta_hat: f64,
    pub l_prime_hat: f64,
    pub policy_value: f64,
    pub train_loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationSummary {
    pub learner: LearnerKind,
    pub n: usize,
    pub metric: &'static str,
    pub mean: f64,
    pub percentile_10: f64,
    pub percentile_90: f64,
    pub values: Vec<f64>,
    pub failures: usize,
}

/// Percentile `p ∈ [0, 1]` by linear interpolation between order
/// statistics (position `p (n - 1)` in the sorted sample).
pub fn percentile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Workers to use: `requested`, else all cores, capped by
/// `RESPCLASS_THREADS` when it holds a positive integer.
pub fn worker_count(requested: Option<usize>) -> usize {
    let base = requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&c| c > 0);
    cap.map_or(base, |c| base.min(c)).max(1)
}

/// Runs `op` on a dedicated pool of `threads` workers.
pub fn with_pool<T: Send>(threads: usize, op: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(op))
}

fn run_cell(spec: &ExperimentSpec, n: usize, rep: usize) -> Result<Vec<ReplicationRecord>> {
    let data_seed = child_seed(spec.seed, &[n as u64, rep as u64, 0]);
    let test_seed = child_seed(spec.seed, &[n as u64, rep as u64, 1]);
    let train_spec = ScenarioSpec::new(spec.scenario, spec.d, n, data_seed)?;
    let (train, _) = generate(&train_spec)?;
    let (test, _) = generate(&train_spec.with_draw(spec.test_size, test_seed))?;
    let theta = spec.theta.resolve(&train)?;
    let xs: Vec<&[f64]> = (0..test.len()).map(|i| test.row(i)).collect();
    Ok(spec
        .learners
        .iter()
        .map(|&learner| {
            let learner_seed = child_seed(spec.seed, &[n as u64, rep as u64, 2, learner as u64]);
            let outcome = fit(learner, &train, theta, &spec.learner, learner_seed)
                .and_then(|report| {
                    let clf = &report.classifier;
                    let losses = estimate_losses(clf, &test, theta)?;
                    Ok(Metrics {
                        bayes_accuracy: accuracy_vs_bayes(clf, &xs, &train_spec, theta)?,
                        l_theta_hat: losses.l_theta_hat,
                        l_prime_hat: losses.l_prime_hat,
                        policy_value: policy_value(clf, &test, theta)?,
                        train_loss: report.final_loss,
                    })
                })
                .map_err(|e| e.to_string());
            ReplicationRecord { learner, n, replication: rep, data_seed, theta, outcome }
        })
        .collect())
}

/// Runs every (n, replication) cell on the current rayon pool and returns
/// records ordered by (learner, n, replication), whatever the completion
/// order. Failed fits are recorded, not fatal.
pub fn run_replications(spec: &ExperimentSpec) -> Result<Vec<ReplicationRecord>> {
    spec.validate()?;
    let cells: Vec<(usize, usize)> =
        spec.n_grid.iter().flat_map(|&n| (0..spec.replications).map(move |r| (n, r))).collect();
    let results: Vec<Vec<ReplicationRecord>> =
        cells.par_iter().map(|&(n, rep)| run_cell(spec, n, rep)).collect::<Result<_>>()?;
    let mut records: Vec<ReplicationRecord> = results.into_iter().flatten().collect();
    let rank = |k: LearnerKind| spec.learners.iter().position(|&l| l == k).unwrap_or(usize::MAX);
    let n_rank = |n: usize| spec.n_grid.iter().position(|&m| m == n).unwrap_or(usize::MAX);
    records.sort_by_key(|r| (rank(r.learner), n_rank(r.n), r.replication));
    Ok(records)
}

/// Mean and 10th/90th percentiles of Bayes accuracy per (learner, n).
pub fn summarize(spec: &ExperimentSpec, records: &[ReplicationRecord]) -> Vec<ReplicationSummary> {
    let mut out = Vec::new();
    for &learner in &spec.learners {
        for &n in &spec.n_grid {
            let cell: Vec<&ReplicationRecord> = records.iter().filter(|r| r.learner == learner && r.n == n).collect();
            let values: Vec<f64> = cell.iter().filter_map(|r| r.outcome.as_ref().ok()).map(|m| m.bayes_accuracy).collect();
            let failures = cell.len() - values.len();
            let mean = if values.is_empty() { f64::NAN } else { values.iter().sum::<f64>() / values.len() as f64 };
            out.push(ReplicationSummary {
                learner,
                n,
                metric: "bayes_accuracy",
                mean,
                percentile_10: percentile(&values, 0.1),
                percentile_90: percentile(&values, 0.9),
                values,
                failures,
            });
        }
    }
    out
}
