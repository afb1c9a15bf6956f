//! Unbiased estimates of responder-classification quality from `(x, t, y)`
//! data, and oracle accuracy on synthetic data.
//!
//! With `s = y t / Q` and prediction `f = f(x)`, each row contributes
//!
//! ```text
//! L'  term   f (2θ - s)
//! FN  term   (1 - f) s / 4
//! FP  term   (1 + f) (2 - s) / 4
//! ```
//!
//! and `L_θ = L'/4 + mean(2θ + (1 - 2θ) s)/4 = θ FP + (1 - θ) FN`. The
//! estimates are unbiased but not clipped, so on finite samples they can
//! leave `[0, 1]`.

use crate::data::{Dataset, GroundTruthUnit, Sign, Theta};
use crate::error::{Error, Result};
use crate::learners::Classify;
use crate::synthetic::{bayes_label, ScenarioSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalReport {
    pub l_theta_hat: f64,
    pub l_prime_hat: f64,
    pub fp_hat: f64,
    pub fn_hat: f64,
    pub n: usize,
    pub theta: Theta,
}

/// Per-row contributions `(L', FP, FN, constant part)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RowTerms {
    pub l_prime: f64,
    pub fp: f64,
    pub fn_: f64,
    pub offset: f64,
}

/// Contributions of one row with signal `s = y t / Q` and decision `f`.
pub fn row_terms(f: Sign, signal: f64, theta: Theta) -> RowTerms {
    let (f, th) = (f.value(), theta.value());
    RowTerms {
        l_prime: f * (2.0 * th - signal),
        fp: 0.25 * (1.0 + f) * (2.0 - signal),
        fn_: 0.25 * (1.0 - f) * signal,
        offset: 2.0 * th + (1.0 - 2.0 * th) * signal,
    }
}

fn check_dim<C: Classify + ?Sized>(classifier: &C, d: usize) -> Result<()> {
    match classifier.input_dim() {
        Some(expected) if expected != d => Err(Error::DimensionMismatch { expected, found: d }),
        _ => Ok(()),
    }
}

fn report_from_sums(sums: RowTerms, n: usize, theta: Theta) -> EvalReport {
    let m = n as f64;
    let l_prime_hat = sums.l_prime / m;
    EvalReport {
        l_theta_hat: 0.25 * l_prime_hat + 0.25 * sums.offset / m,
        l_prime_hat,
        fp_hat: sums.fp / m,
        fn_hat: sums.fn_ / m,
        n,
        theta,
    }
}

/// Estimates `L_θ`, `L'_θ`, and the false-positive/negative rates of a
/// classifier on experimental data.
pub fn estimate_losses<C: Classify + ?Sized>(classifier: &C, ds: &Dataset, theta: Theta) -> Result<EvalReport> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_dim(classifier, ds.dim())?;
    let mut sums = RowTerms::default();
    for i in 0..ds.len() {
        let t = row_terms(classifier.classify(ds.row(i)), ds.effect_signal(i), theta);
        sums.l_prime += t.l_prime;
        sums.fp += t.fp;
        sums.fn_ += t.fn_;
        sums.offset += t.offset;
    }
    Ok(report_from_sums(sums, ds.len(), theta))
}

/// Inverse-propensity estimate of `U_θ(f) = E[Y(f(X))] - 2θ P(f(X) = +1)`.
pub fn policy_value<C: Classify + ?Sized>(classifier: &C, ds: &Dataset, theta: Theta) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_dim(classifier, ds.dim())?;
    let (mut reward, mut positives) = (0.0, 0.0);
    for i in 0..ds.len() {
        let f = classifier.classify(ds.row(i));
        reward += policy_reward_term(f, ds.treatment(i), ds.outcome(i), ds.q(i));
        positives += f.is_pos() as u8 as f64;
    }
    let n = ds.len() as f64;
    Ok(reward / n - 2.0 * theta.value() * positives / n)
}

/// `1{t = f} y / Q`, whose conditional mean given `x` is `Y(f(x))`.
pub fn policy_reward_term(f: Sign, t: Sign, y: Sign, q: f64) -> f64 {
    if t == f {
        y.value() / q
    } else {
        0.0
    }
}

/// `L'_θ` and `U_θ` with the expectation over treatment taken exactly,
/// using each unit's potential outcomes and treatment probability `e_i`.
///
/// Each unit contributes both of its possible observations, weighted by
/// their assignment probabilities, through the same row terms the sample
/// estimators use.
pub fn exact_treatment_expectation<C: Classify + ?Sized>(
    classifier: &C,
    units: &[GroundTruthUnit],
    propensities: &[f64],
    theta: Theta,
) -> Result<(f64, f64)> {
    if units.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if units.len() != propensities.len() {
        return Err(Error::LengthMismatch { left: units.len(), right: propensities.len() });
    }
    let (mut l_prime, mut utility) = (0.0, 0.0);
    for (unit, &e) in units.iter().zip(propensities) {
        let f = classifier.classify(&unit.x);
        for t in [Sign::Pos, Sign::Neg] {
            let q = crate::data::assignment_probability(e, t);
            let y = unit.outcome(t);
            let signal = (y * t).value() / q;
            l_prime += q * row_terms(f, signal, theta).l_prime;
            utility += q * policy_reward_term(f, t, y, q);
        }
        utility -= 2.0 * theta.value() * f.is_pos() as u8 as f64;
    }
    let n = units.len() as f64;
    Ok((l_prime / n, utility / n))
}

/// Fraction of `xs` on which the classifier agrees with the Bayes rule.
pub fn accuracy_vs_bayes<C: Classify + ?Sized, X: AsRef<[f64]>>(
    classifier: &C,
    xs: &[X],
    spec: &ScenarioSpec,
    theta: Theta,
) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_dim(classifier, spec.d)?;
    let mut hits = 0usize;
    for x in xs {
        if classifier.classify(x.as_ref()) == bayes_label(x.as_ref(), spec, theta)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / xs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Propensity;
    use crate::synthetic::{generate, sample_features, ScenarioKind};

    #[test]
    fn single_row_hand_evaluation() {
        let ds = Dataset::new(1, vec![0.0], &[1], &[1], Propensity::Constant(0.5)).unwrap();
        let report = estimate_losses(&|_: &[f64]| Sign::Pos, &ds, Theta::HALF).unwrap();
        assert_eq!(report.l_prime_hat, -1.0);
        assert_eq!(report.l_theta_hat, 0.0);
        assert!((report.l_theta_hat - (0.5 * report.fp_hat + 0.5 * report.fn_hat)).abs() < 1e-12);
    }

    #[test]
    fn always_positive_at_theta_zero_has_no_loss() {
        let spec = ScenarioSpec::new(ScenarioKind::Linear, 2, 5000, 3).unwrap();
        let (ds, _) = generate(&spec).unwrap();
        let theta = Theta::new(0.0).unwrap();
        let report = estimate_losses(&|_: &[f64]| Sign::Pos, &ds, theta).unwrap();
        assert_eq!(report.fn_hat, 0.0);
        assert!(report.l_theta_hat.abs() < 1e-12);
    }

    #[test]
    fn internal_identity_holds() {
        let spec = ScenarioSpec::new(ScenarioKind::Spherical, 2, 3000, 5).unwrap();
        let (ds, _) = generate(&spec).unwrap();
        for &th in &[0.0, 0.2, 0.5, 0.9, 1.0] {
            let theta = Theta::new(th).unwrap();
            let report = estimate_losses(&|x: &[f64]| Sign::of(x[0] * x[1]), &ds, theta).unwrap();
            let recombined = th * report.fp_hat + (1.0 - th) * report.fn_hat;
            assert!((report.l_theta_hat - recombined).abs() < 1e-12);
        }
    }

    #[test]
    fn policy_value_cases() {
        // Responders everywhere: Y = T.
        let n = 4000;
        let spec = ScenarioSpec::new(ScenarioKind::Linear, 1, n, 9).unwrap();
        let (base, _) = generate(&spec).unwrap();
        let t: Vec<i64> = (0..n).map(|i| base.treatment(i).as_int() as i64).collect();
        let ds = Dataset::new(1, base.features().to_vec(), &t, &t, Propensity::Constant(0.5)).unwrap();
        let u = policy_value(&|_: &[f64]| Sign::Pos, &ds, Theta::new(0.0).unwrap()).unwrap();
        assert!((u - 1.0).abs() < 0.1, "{u}");
        // With f ≡ -1 the cost term vanishes, so θ does not matter.
        let a = policy_value(&|_: &[f64]| Sign::Neg, &ds, Theta::new(0.0).unwrap()).unwrap();
        let b = policy_value(&|_: &[f64]| Sign::Neg, &ds, Theta::new(0.8).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bayes_accuracy_extremes() {
        let spec = ScenarioSpec::new(ScenarioKind::Linear, 2, 1, 1).unwrap();
        let xs = sample_features(2, 20_000, 17);
        let bayes = |x: &[f64]| bayes_label(x, &spec, Theta::HALF).unwrap();
        assert_eq!(accuracy_vs_bayes(&bayes, &xs, &spec, Theta::HALF).unwrap(), 1.0);
        let negated = |x: &[f64]| -bayes_label(x, &spec, Theta::HALF).unwrap();
        assert_eq!(accuracy_vs_bayes(&negated, &xs, &spec, Theta::HALF).unwrap(), 0.0);
        let constant = accuracy_vs_bayes(&|_: &[f64]| Sign::Pos, &xs, &spec, Theta::HALF).unwrap();
        assert!((constant - 0.5).abs() < 0.02, "{constant}");
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        let ds = Dataset::new(2, vec![0.0, 0.0], &[1], &[1], Propensity::default()).unwrap();
        let clf = crate::learners::ResponderClassifier::ScoreThreshold(crate::learners::Scorer::Linear(
            crate::learners::LinearScorer { weights: vec![1.0], bias: 0.0 },
        ));
        assert!(matches!(estimate_losses(&clf, &ds, Theta::HALF), Err(Error::DimensionMismatch { .. })));
        let empty: Vec<Vec<f64>> = vec![];
        let spec = ScenarioSpec::new(ScenarioKind::Linear, 2, 1, 1).unwrap();
        assert!(accuracy_vs_bayes(&|_: &[f64]| Sign::Pos, &empty, &spec, Theta::HALF).is_err());
    }
}
