//! Sample estimators against exact expectations over treatment draws, and
//! identities tying the surrogate problem to the estimated losses.

use proptest::prelude::*;
use rand::Rng;
use respclass::evaluation::{estimate_losses, exact_treatment_expectation, policy_value};
use respclass::learners::Classify;
use respclass::losses::{weighted_empirical_risk, LossKind};
use respclass::rng::{child_seed, seeded};
use respclass::surrogate::to_surrogate;
use respclass::synthetic::{generate, ScenarioKind, ScenarioSpec};
use respclass::{Dataset, GroundTruthUnit, Propensity, Sign, Theta};

/// Re-randomizes treatment over fixed units, revealing the matching
/// potential outcome.
fn assign(units: &[GroundTruthUnit], es: &[f64], seed: u64) -> Dataset {
    let mut rng = seeded(seed);
    let t: Vec<Sign> = es.iter().map(|&e| if rng.gen_bool(e) { Sign::Pos } else { Sign::Neg }).collect();
    let y: Vec<Sign> = units.iter().zip(&t).map(|(u, &t)| u.outcome(t)).collect();
    let x: Vec<f64> = units.iter().flat_map(|u| u.x.iter().copied()).collect();
    Dataset::from_signs(units[0].x.len(), x, t, y, Propensity::PerObservation(es.to_vec())).unwrap()
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn estimators_are_unbiased_over_treatment_draws() {
    let (_, units) = generate(&ScenarioSpec::new(ScenarioKind::Spherical, 2, 400, 3).unwrap()).unwrap();
    let es: Vec<f64> = (0..units.len()).map(|i| [0.25, 0.5, 0.8][i % 3]).collect();
    let f = |x: &[f64]| Sign::of(x[0] - 0.3 * x[1]);
    let theta = Theta::new(0.35).unwrap();
    let (exact_l_prime, exact_u) = exact_treatment_expectation(&f, &units, &es, theta).unwrap();

    let (mut l_primes, mut values) = (Vec::new(), Vec::new());
    for r in 0..600 {
        let ds = assign(&units, &es, child_seed(17, &[r]));
        l_primes.push(estimate_losses(&f, &ds, theta).unwrap().l_prime_hat);
        values.push(policy_value(&f, &ds, theta).unwrap());
    }
    let (m, se) = mean_and_se(&l_primes);
    assert!((m - exact_l_prime).abs() <= 4.0 * se, "L' {m} vs {exact_l_prime} (se {se})");
    let (m, se) = mean_and_se(&values);
    assert!((m - exact_u).abs() <= 4.0 * se, "U {m} vs {exact_u} (se {se})");
}

#[test]
fn false_rates_match_ground_truth_counts() {
    // Under a fixed design FP/FN estimates average to the realized
    // population rates P(f=+1, R=-1) and P(f=-1, R=+1).
    let (_, units) = generate(&ScenarioSpec::new(ScenarioKind::Linear, 2, 500, 9).unwrap()).unwrap();
    let es = vec![0.5; units.len()];
    let f = |x: &[f64]| Sign::of(x[0] + 0.5 * x[1]);
    let n = units.len() as f64;
    let fp = units.iter().filter(|u| f.classify(&u.x) == Sign::Pos && u.r == Sign::Neg).count() as f64 / n;
    let fn_ = units.iter().filter(|u| f.classify(&u.x) == Sign::Neg && u.r == Sign::Pos).count() as f64 / n;
    let theta = Theta::new(0.5).unwrap();
    let (mut fps, mut fns) = (Vec::new(), Vec::new());
    for r in 0..600 {
        let report = estimate_losses(&f, &assign(&units, &es, child_seed(23, &[r])), theta).unwrap();
        fps.push(report.fp_hat);
        fns.push(report.fn_hat);
    }
    let (m, se) = mean_and_se(&fps);
    assert!((m - fp).abs() <= 4.0 * se, "FP {m} vs {fp}");
    let (m, se) = mean_and_se(&fns);
    assert!((m - fn_).abs() <= 4.0 * se, "FN {m} vs {fn_}");
}

fn arb_dataset() -> impl Strategy<Value = (Dataset, f64)> {
    (1usize..60, 0.0f64..=1.0).prop_flat_map(|(n, theta)| {
        (
            prop::collection::vec(-2.0f64..2.0, n * 2),
            prop::collection::vec(prop::bool::ANY, n),
            prop::collection::vec(prop::bool::ANY, n),
            prop::collection::vec(0.05f64..0.95, n),
        )
            .prop_map(move |(x, t, y, e)| {
                let sign = |b: &bool| if *b { 1 } else { -1 };
                let t: Vec<i64> = t.iter().map(sign).collect();
                let y: Vec<i64> = y.iter().map(sign).collect();
                (Dataset::new(2, x, &t, &y, Propensity::PerObservation(e)).unwrap(), theta)
            })
    })
}

proptest! {
    /// `L'` is the weighted 0-1 risk of the surrogate problem, shifted:
    /// `f (2θ - s) = w (2·1{f ≠ z} - 1)`.
    #[test]
    fn l_prime_is_shifted_weighted_error((ds, theta) in arb_dataset(), a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let theta = Theta::new(theta).unwrap();
        let f = move |x: &[f64]| Sign::of(a * x[0] + b * x[1] + 0.1);
        let ex = to_surrogate(&ds, theta);
        let scores: Vec<f64> = (0..ds.len()).map(|i| f(ds.row(i)).value()).collect();
        let zero_one = weighted_empirical_risk(&ex, &scores, LossKind::ZeroOne).unwrap();
        let mean_w = ex.weights().iter().sum::<f64>() / ex.len() as f64;
        let report = estimate_losses(&f, &ds, theta).unwrap();
        prop_assert!((report.l_prime_hat - (2.0 * zero_one - mean_w)).abs() <= 1e-9 * (1.0 + mean_w));
    }

    /// `L_θ = θ·FP + (1 - θ)·FN` holds row by row, not just in expectation.
    #[test]
    fn loss_decomposes_into_error_rates((ds, theta) in arb_dataset(), a in -1.0f64..1.0) {
        let theta = Theta::new(theta).unwrap();
        let f = move |x: &[f64]| Sign::of(x[1] - a);
        let r = estimate_losses(&f, &ds, theta).unwrap();
        let th = theta.value();
        prop_assert!((r.l_theta_hat - (th * r.fp_hat + (1.0 - th) * r.fn_hat)).abs() <= 1e-9 * (1.0 + r.fp_hat.abs() + r.fn_hat.abs()));
    }
}
