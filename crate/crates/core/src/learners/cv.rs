//! K-fold model selection scored by the held-out estimate of `L'_θ`.

use rand::seq::SliceRandom;

use super::classifier::Classify;
use crate::data::{Dataset, Sign, Theta};
use crate::error::{Error, Result};
use crate::evaluation::row_terms;
use crate::rng::seeded;

/// Hyperparameter settings that can be ordered by regularization strength.
pub trait Regularized {
    /// Larger keys (compared lexicographically) mean stronger regularization.
    fn strength(&self) -> (f64, f64);
}

/// Train/test split of one fold, as row indices into the full dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fold {
    pub index: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvResult<S> {
    pub settings: Vec<S>,
    /// `fold_scores[s][f]`: held-out `L'_θ` of setting `s` on fold `f`.
    pub fold_scores: Vec<Vec<f64>>,
    pub mean_scores: Vec<f64>,
    pub best: usize,
}

impl<S: Regularized> CvResult<S> {
    /// Averages per-fold scores and selects the best setting.
    pub fn from_fold_scores(settings: Vec<S>, fold_scores: Vec<Vec<f64>>) -> Self {
        let mean_scores: Vec<f64> = fold_scores.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
        let best = select(&settings, &mean_scores);
        CvResult { settings, fold_scores, mean_scores, best }
    }
}

impl<S> CvResult<S> {
    pub fn best_setting(&self) -> &S {
        &self.settings[self.best]
    }
}

/// Seeded fold labels: rows are shuffled and dealt round-robin, so fold
/// sizes differ by at most one.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("cross-validation needs at least 2 folds, got {k}")));
    }
    if n < k {
        return Err(Error::InvalidConfig(format!("{n} rows cannot fill {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded(seed));
    let mut fold = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        fold[row] = pos % k;
    }
    Ok(fold)
}

pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<Vec<Fold>> {
    let labels = fold_assignment(n, k, seed)?;
    Ok((0..k)
        .map(|f| Fold {
            index: f,
            train: (0..n).filter(|&i| labels[i] != f).collect(),
            test: (0..n).filter(|&i| labels[i] == f).collect(),
        })
        .collect())
}

/// Held-out `L'_θ` of a vector of predictions on `rows`.
pub fn held_out_l_prime(ds: &Dataset, rows: &[usize], predictions: &[Sign], theta: Theta) -> f64 {
    debug_assert_eq!(rows.len(), predictions.len());
    let total: f64 = rows
        .iter()
        .zip(predictions)
        .map(|(&i, &f)| row_terms(f, ds.effect_signal(i), theta).l_prime)
        .sum();
    total / rows.len() as f64
}

/// Cross-validation where the caller predicts every setting on a fold at
/// once, which lets learners share work (kernel matrices, warm starts)
/// across the grid. `predict_fold` returns, for each setting, predictions
/// on `fold.test` in order.
pub fn cross_validate_with<S, F>(
    ds: &Dataset,
    theta: Theta,
    grid: &[S],
    k: usize,
    seed: u64,
    mut predict_fold: F,
) -> Result<CvResult<S>>
where
    S: Clone + Regularized,
    F: FnMut(&Fold) -> Result<Vec<Vec<Sign>>>,
{
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty hyperparameter grid".into()));
    }
    let folds = make_folds(ds.len(), k, seed)?;
    let mut fold_scores = vec![Vec::with_capacity(k); grid.len()];
    for fold in &folds {
        let predictions = predict_fold(fold)?;
        if predictions.len() != grid.len() {
            return Err(Error::LengthMismatch { left: predictions.len(), right: grid.len() });
        }
        for (s, pred) in predictions.iter().enumerate() {
            if pred.len() != fold.test.len() {
                return Err(Error::LengthMismatch { left: pred.len(), right: fold.test.len() });
            }
            fold_scores[s].push(held_out_l_prime(ds, &fold.test, pred, theta));
        }
    }
    Ok(CvResult::from_fold_scores(grid.to_vec(), fold_scores))
}

/// Cross-validation with one independent fit per (fold, setting).
pub fn cross_validate<S, C, F>(ds: &Dataset, theta: Theta, grid: &[S], k: usize, seed: u64, mut fit: F) -> Result<CvResult<S>>
where
    S: Clone + Regularized,
    C: Classify,
    F: FnMut(&Dataset, &S) -> Result<C>,
{
    cross_validate_with(ds, theta, grid, k, seed, |fold| {
        let train = ds.subset(&fold.train)?;
        grid.iter()
            .map(|setting| {
                let clf = fit(&train, setting)?;
                Ok(fold.test.iter().map(|&i| clf.classify(ds.row(i))).collect())
            })
            .collect()
    })
}

/// Lowest mean score; exact ties go to the more strongly regularized setting.
fn select<S: Regularized>(grid: &[S], scores: &[f64]) -> usize {
    let mut best = 0;
    for s in 1..grid.len() {
        let better = scores[s] < scores[best]
            || (scores[s] == scores[best] && grid[s].strength() > grid[best].strength())
            || (scores[best].is_nan() && !scores[s].is_nan());
        if better {
            best = s;
        }
    }
    best
}
