//! T-learner plug-in baseline: one logistic regression per treatment arm,
//! thresholding the difference of predicted outcome probabilities.

use super::classifier::{OutcomeModel, ResponderClassifier};
use super::mlp::{train_from, Head, MlpScorer, Objective, TrainConfig};
use crate::data::{Dataset, Sign, Theta};
use crate::error::Result;
use crate::rng::child_seed;
use crate::surrogate::WeightedExamples;

/// Laplace-smoothed base rate `(k + 1) / (n + 2)`.
fn base_rate(positives: usize, total: usize) -> f64 {
    (positives as f64 + 1.0) / (total as f64 + 2.0)
}

fn fit_arm(ds: &Dataset, arm: Sign, cfg: &TrainConfig, seed: u64) -> Result<(OutcomeModel, f64)> {
    let rows: Vec<usize> = (0..ds.len()).filter(|&i| ds.treatment(i) == arm).collect();
    let positives = rows.iter().filter(|&&i| ds.outcome(i).is_pos()).count();
    if positives == 0 || positives == rows.len() {
        return Ok((OutcomeModel::Constant(base_rate(positives, rows.len())), f64::NAN));
    }
    let mut features = Vec::with_capacity(rows.len() * ds.dim());
    for &i in &rows {
        features.extend_from_slice(ds.row(i));
    }
    let labels = rows.iter().map(|&i| ds.outcome(i)).collect();
    let examples = WeightedExamples::new(ds.dim(), features, labels, vec![1.0; rows.len()])?;
    let init = MlpScorer::glorot(&[ds.dim(), 1], Head::Sigmoid, seed)?;
    let cfg = TrainConfig { seed, ..cfg.clone() };
    let fit = train_from(init, &examples, Objective::Logistic, &cfg)?;
    let linear = fit.net.to_linear().expect("no hidden layers");
    Ok((OutcomeModel::Logistic(linear), fit.final_loss))
}

/// Fitted plug-in classifier and the two arms' final cross-entropies
/// (NaN for an arm that fell back to a constant).
#[derive(Clone, Debug)]
pub struct TLearnerFit {
    pub classifier: ResponderClassifier,
    pub treated_loss: f64,
    pub control_loss: f64,
}

pub fn train_tlearner_lr(ds: &Dataset, theta: Theta, cfg: &TrainConfig) -> Result<TLearnerFit> {
    cfg.validate()?;
    let (treated, treated_loss) = fit_arm(ds, Sign::Pos, cfg, child_seed(cfg.seed, &[1]))?;
    let (control, control_loss) = fit_arm(ds, Sign::Neg, cfg, child_seed(cfg.seed, &[2]))?;
    Ok(TLearnerFit {
        classifier: ResponderClassifier::CatePlugin { treated, control, theta },
        treated_loss,
        control_loss,
    })
}
