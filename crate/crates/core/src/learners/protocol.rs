//! Named learners and the training protocol behind each: surrogate
//! construction, hyperparameter search, and the final fit.

use std::fmt;
use std::str::FromStr;

use super::classifier::ResponderClassifier;
use super::cv::{held_out_l_prime, make_folds, CvResult, Regularized};
use super::kernel::{GramMatrix, KernelSpec};
use super::mlp::{respnet_hidden, train_resp_disc, train_resp_gen, TrainConfig};
use super::scorer::Scorer;
use super::svm::{train_respsvm, train_respsvm_with_gram, SvmFit, SvmParams};
use super::tlearner::train_tlearner_lr;
use crate::data::{Dataset, Sign, Theta};
use crate::error::{Error, Result};
use crate::rng::child_seed;
use crate::surrogate::{generative_examples, to_surrogate, WeightedExamples};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LearnerKind {
    RespSvmLinear,
    RespSvmRbf,
    RespLrGen,
    RespLrDisc,
    RespNetGen,
    RespNetDisc,
    TLearnerLr,
    ConstantPos,
    ConstantNeg,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 9] = [
        LearnerKind::RespSvmLinear,
        LearnerKind::RespSvmRbf,
        LearnerKind::RespLrGen,
        LearnerKind::RespLrDisc,
        LearnerKind::RespNetGen,
        LearnerKind::RespNetDisc,
        LearnerKind::TLearnerLr,
        LearnerKind::ConstantPos,
        LearnerKind::ConstantNeg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::RespSvmLinear => "respsvm-linear",
            LearnerKind::RespSvmRbf => "respsvm-rbf",
            LearnerKind::RespLrGen => "resplr-gen",
            LearnerKind::RespLrDisc => "resplr-disc",
            LearnerKind::RespNetGen => "respnet-gen",
            LearnerKind::RespNetDisc => "respnet-disc",
            LearnerKind::TLearnerLr => "tlearner-lr",
            LearnerKind::ConstantPos => "constant-pos",
            LearnerKind::ConstantNeg => "constant-neg",
        }
    }

    pub fn is_svm(self) -> bool {
        matches!(self, LearnerKind::RespSvmLinear | LearnerKind::RespSvmRbf)
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LearnerKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = LearnerKind::ALL.iter().map(|k| k.name()).collect();
            Error::InvalidConfig(format!("unknown learner `{s}` (expected one of: {})", names.join(", ")))
        })
    }
}

/// One point of the SVM grid. `gamma` is `None` for the linear kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvmSetting {
    pub c: f64,
    pub gamma: Option<f64>,
}

impl SvmSetting {
    pub fn kernel(&self) -> KernelSpec {
        match self.gamma {
            Some(gamma) => KernelSpec::Rbf { gamma },
            None => KernelSpec::Linear,
        }
    }
}

impl Regularized for SvmSetting {
    /// Smaller `C`, then smaller `gamma` (a smoother kernel), is stronger.
    fn strength(&self) -> (f64, f64) {
        (-self.c, -self.gamma.unwrap_or(0.0))
    }
}

impl fmt::Display for SvmSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gamma {
            Some(g) => write!(f, "C={} gamma={}", self.c, g),
            None => write!(f, "C={}", self.c),
        }
    }
}

/// Everything a learner needs besides data, θ, and seed.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerConfig {
    /// Optimizer settings for the network learners and the T-learner.
    pub train: TrainConfig,
    /// SVM box scales searched by cross-validation.
    pub c_grid: Vec<f64>,
    /// RBF widths searched; `None` means `{0.01, 0.1, 1, 10} / d`.
    pub gamma_grid: Option<Vec<f64>>,
    /// Folds for the SVM grid search (ignored when the grid has one point).
    pub folds: usize,
    pub svm: SvmParams,
    /// Largest training set for which kernel matrices are precomputed.
    pub gram_limit: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            c_grid: vec![0.1, 1.0, 10.0, 100.0],
            gamma_grid: None,
            folds: 5,
            svm: SvmParams::default(),
            gram_limit: 6000,
        }
    }
}

impl LearnerConfig {
    pub fn gammas(&self, d: usize) -> Vec<f64> {
        match &self.gamma_grid {
            Some(g) => g.clone(),
            None => [0.01, 0.1, 1.0, 10.0].iter().map(|g| g / d as f64).collect(),
        }
    }

    /// The SVM grid, `C` ascending within each kernel.
    pub fn svm_grid(&self, kind: LearnerKind, d: usize) -> Vec<SvmSetting> {
        let mut cs = self.c_grid.clone();
        cs.sort_by(f64::total_cmp);
        let gammas: Vec<Option<f64>> = match kind {
            LearnerKind::RespSvmRbf => self.gammas(d).into_iter().map(Some).collect(),
            _ => vec![None],
        };
        gammas.iter().flat_map(|&gamma| cs.iter().map(move |&c| SvmSetting { c, gamma })).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.c_grid.is_empty() || self.c_grid.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidConfig("C grid must be nonempty and positive".into()));
        }
        if let Some(g) = &self.gamma_grid {
            if g.is_empty() || g.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::InvalidConfig("gamma grid must be nonempty and positive".into()));
            }
        }
        Ok(())
    }
}

/// A trained classifier and what the training run reported.
#[derive(Clone, Debug)]
pub struct FitReport {
    pub learner: LearnerKind,
    pub classifier: ResponderClassifier,
    pub theta: Theta,
    /// Final training objective (NaN when nothing was optimized).
    pub final_loss: f64,
    pub cv: Option<CvResult<SvmSetting>>,
    pub selected: Option<SvmSetting>,
    /// Whether the final optimizer run met its stopping rule.
    pub converged: bool,
    /// Human-readable remarks, e.g. degenerate-data fallbacks.
    pub notes: Vec<String>,
}

impl FitReport {
    fn new(learner: LearnerKind, classifier: ResponderClassifier, theta: Theta, final_loss: f64) -> Self {
        Self { learner, classifier, theta, final_loss, cv: None, selected: None, converged: true, notes: Vec::new() }
    }
}

/// Trains `kind` on `ds` at threshold `theta`. Deterministic given `seed`.
pub fn fit(kind: LearnerKind, ds: &Dataset, theta: Theta, cfg: &LearnerConfig, seed: u64) -> Result<FitReport> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let train = TrainConfig { seed: child_seed(seed, &[1]), ..cfg.train.clone() };
    match kind {
        LearnerKind::ConstantPos => Ok(FitReport::new(kind, ResponderClassifier::Constant(Sign::Pos), theta, f64::NAN)),
        LearnerKind::ConstantNeg => Ok(FitReport::new(kind, ResponderClassifier::Constant(Sign::Neg), theta, f64::NAN)),
        LearnerKind::RespLrDisc | LearnerKind::RespNetDisc => {
            let examples = to_surrogate(ds, theta);
            let hidden = if kind == LearnerKind::RespLrDisc { vec![] } else { respnet_hidden(ds.dim()) };
            let trained = train_resp_disc(&examples, &hidden, &train)?;
            let scorer = match trained.net.to_linear() {
                Some(linear) => Scorer::Linear(linear),
                None => Scorer::Mlp(trained.net),
            };
            Ok(FitReport::new(kind, ResponderClassifier::ScoreThreshold(scorer), theta, trained.final_loss))
        }
        LearnerKind::RespLrGen | LearnerKind::RespNetGen => {
            let examples = generative_examples(ds);
            let hidden = if kind == LearnerKind::RespLrGen { vec![] } else { respnet_hidden(ds.dim()) };
            let trained = train_resp_gen(&examples, &hidden, &train)?;
            let clf = ResponderClassifier::ProbThreshold { model: trained.net, theta };
            Ok(FitReport::new(kind, clf, theta, trained.final_loss))
        }
        LearnerKind::TLearnerLr => {
            let fit = train_tlearner_lr(ds, theta, &train)?;
            let losses = [fit.treated_loss, fit.control_loss];
            let final_loss = if losses.iter().all(|l| l.is_nan()) {
                f64::NAN
            } else {
                losses.iter().filter(|l| !l.is_nan()).sum()
            };
            let mut report = FitReport::new(kind, fit.classifier, theta, final_loss);
            for (arm, loss) in [("treated", fit.treated_loss), ("control", fit.control_loss)] {
                if loss.is_nan() {
                    report.notes.push(format!("{arm} arm is empty or single-class; using its smoothed base rate"));
                }
            }
            Ok(report)
        }
        LearnerKind::RespSvmLinear | LearnerKind::RespSvmRbf => fit_svm(kind, ds, theta, cfg, seed),
    }
}

/// Constant rule for surrogate data with a single positively weighted
/// class: the heavier class (ties and empty data give +1).
fn degenerate_label(examples: &WeightedExamples) -> Sign {
    let (mut pos, mut neg) = (0.0, 0.0);
    for ex in examples.iter() {
        match ex.z {
            Sign::Pos => pos += ex.w,
            Sign::Neg => neg += ex.w,
        }
    }
    if neg > pos {
        Sign::Neg
    } else {
        Sign::Pos
    }
}

/// Kernel values for one kernel, precomputed or on demand.
struct KernelData<'a> {
    examples: &'a WeightedExamples,
    kernel: KernelSpec,
    gram: Option<GramMatrix>,
}

impl<'a> KernelData<'a> {
    fn new(examples: &'a WeightedExamples, kernel: KernelSpec, limit: usize) -> Self {
        let gram = (examples.len() <= limit).then(|| GramMatrix::compute(examples.features(), examples.dim(), kernel));
        Self { examples, kernel, gram }
    }

    /// Fits every `C` in `cs` (ascending) on `rows`, warm-starting each
    /// from the previous solution when kernel values are precomputed.
    fn fit_path(&self, rows: &[usize], cs: &[f64], params: &SvmParams) -> Result<Vec<SvmFit>> {
        let sub = self.examples.subset(rows);
        let mut fits: Vec<SvmFit> = Vec::with_capacity(cs.len());
        for (k, &c) in cs.iter().enumerate() {
            let p = SvmParams { c, ..params.clone() };
            let fit = match &self.gram {
                Some(gram) => {
                    let warm: Option<Vec<f64>> = k
                        .checked_sub(1)
                        .map(|prev| fits[prev].alpha.iter().map(|a| a * (c / cs[prev])).collect());
                    train_respsvm_with_gram(&sub, rows, gram, self.kernel, &p, warm.as_deref())?
                }
                None => train_respsvm(&sub, self.kernel, &p)?,
            };
            fits.push(fit);
        }
        Ok(fits)
    }

    /// Decision values of a fit trained on `train_rows`, at `test_rows`.
    fn decision(&self, fit: &SvmFit, train_rows: &[usize], test_rows: &[usize]) -> Vec<f64> {
        match &self.gram {
            Some(gram) => test_rows
                .iter()
                .map(|&t| {
                    fit.support_indices
                        .iter()
                        .zip(fit.scorer.dual_coefs())
                        .map(|(&s, &coef)| coef * gram.get(train_rows[s], t))
                        .sum::<f64>()
                        + fit.scorer.bias()
                })
                .collect(),
            None => test_rows.iter().map(|&t| fit.scorer.score(self.examples.row(t))).collect(),
        }
    }
}

fn fit_svm(kind: LearnerKind, ds: &Dataset, theta: Theta, cfg: &LearnerConfig, seed: u64) -> Result<FitReport> {
    let examples = to_surrogate(ds, theta);
    let grid = cfg.svm_grid(kind, ds.dim());
    let all: Vec<usize> = (0..examples.len()).collect();
    let degenerate = |examples: &WeightedExamples, note: &str| {
        let label = degenerate_label(examples);
        let mut report = FitReport::new(kind, ResponderClassifier::Constant(label), theta, f64::NAN);
        report.notes.push(format!("{note}; predicting constant {label}"));
        report
    };
    if !has_both_classes(&examples, &all) {
        return Ok(degenerate(&examples, "surrogate labels have a single class"));
    }

    let (cv, selected) = if grid.len() > 1 {
        let cv = grid_search(ds, &examples, theta, &grid, cfg, child_seed(seed, &[2]))?;
        let best = *cv.best_setting();
        (Some(cv), best)
    } else {
        (None, grid[0])
    };

    let data = KernelData::new(&examples, selected.kernel(), cfg.gram_limit);
    let fit = data.fit_path(&all, &[selected.c], &cfg.svm)?.remove(0);
    let scorer = match (selected.gamma, fit.scorer.to_linear()) {
        (None, Some(linear)) => Scorer::Linear(linear),
        _ => Scorer::Kernel(fit.scorer),
    };
    let mut report = FitReport::new(kind, ResponderClassifier::ScoreThreshold(scorer), theta, fit.training_loss);
    report.converged = fit.converged;
    if !fit.converged {
        report.notes.push(format!(
            "solver stopped after {} iterations with KKT gap {:.3e}",
            fit.iterations, fit.kkt_gap
        ));
    }
    report.cv = cv;
    report.selected = Some(selected);
    Ok(report)
}

fn has_both_classes(examples: &WeightedExamples, rows: &[usize]) -> bool {
    let mut seen = [false; 2];
    for &i in rows {
        if examples.weight(i) > 0.0 {
            seen[examples.label(i).is_pos() as usize] = true;
        }
    }
    seen[0] && seen[1]
}

/// K-fold search over `grid` (grouped by kernel, `C` ascending), scoring
/// held-out `L'_θ`.
fn grid_search(
    ds: &Dataset,
    examples: &WeightedExamples,
    theta: Theta,
    grid: &[SvmSetting],
    cfg: &LearnerConfig,
    seed: u64,
) -> Result<CvResult<SvmSetting>> {
    let folds = make_folds(ds.len(), cfg.folds, seed)?;
    let mut fold_scores = vec![Vec::with_capacity(folds.len()); grid.len()];
    let mut start = 0;
    while start < grid.len() {
        let gamma = grid[start].gamma;
        let end = start + grid[start..].iter().take_while(|s| s.gamma == gamma).count();
        let cs: Vec<f64> = grid[start..end].iter().map(|s| s.c).collect();
        let data = KernelData::new(examples, grid[start].kernel(), cfg.gram_limit);
        for fold in &folds {
            if !has_both_classes(examples, &fold.train) {
                let label = degenerate_label(&examples.subset(&fold.train));
                let pred = vec![label; fold.test.len()];
                for s in start..end {
                    fold_scores[s].push(held_out_l_prime(ds, &fold.test, &pred, theta));
                }
                continue;
            }
            let fits = data.fit_path(&fold.train, &cs, &cfg.svm)?;
            for (s, fit) in (start..end).zip(&fits) {
                let pred: Vec<Sign> =
                    data.decision(fit, &fold.train, &fold.test).into_iter().map(Sign::of).collect();
                fold_scores[s].push(held_out_l_prime(ds, &fold.test, &pred, theta));
            }
        }
        start = end;
    }
    Ok(CvResult::from_fold_scores(grid.to_vec(), fold_scores))
}
