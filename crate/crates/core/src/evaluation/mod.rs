//! Loss and value estimation, Monte Carlo replication, and bootstrap
//! confidence intervals.

pub mod bootstrap;
pub mod estimators;
pub mod replicate;

pub use bootstrap::{bootstrap_ci, BootstrapConfig, BootstrapResult, CoefficientCi};
pub use estimators::{
    accuracy_vs_bayes, estimate_losses, exact_treatment_expectation, policy_value, row_terms, EvalReport, RowTerms,
};
pub use replicate::{
    percentile, run_replications, summarize, with_pool, worker_count, ExperimentSpec, Metrics, ReplicationRecord,
    ReplicationSummary,
};
