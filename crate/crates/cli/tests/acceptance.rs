//! Acceptance criteria, one pass/fail line each.
//!
//! Run with `cargo test --release -p respclass-cli --test acceptance -- --nocapture`
//! to see the report. Criterion 4's WCE half cannot hold (the scalar
//! minimizer of the expected WCE is (1 + ρ)/(4 − 2ρ), not ρ); its line is
//! printed as FAIL, and the strict assertion lives in an ignored test.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use respclass::evaluation::{
    estimate_losses, exact_treatment_expectation, run_replications, summarize, with_pool, worker_count,
    ExperimentSpec, ReplicationSummary,
};
use respclass::learners::mlp::{objective_gradient, objective_value};
use respclass::learners::{train_respsvm, KernelSpec, LearnerKind, MlpScorer, Objective, SvmParams};
use respclass::learners::{Head, ResponderClassifier};
use respclass::losses::{adjusted_nll, generative_nll, wce};
use respclass::rng::{child_seed, seeded};
use respclass::surrogate::{balanced_theta, balancing_value, generative_examples, to_surrogate};
use respclass::synthetic::{generate, ScenarioKind, ScenarioSpec};
use respclass::{Dataset, Propensity, Sign, Theta, WeightedExamples};

fn report(id: &str, name: &str, pass: bool, detail: &str, elapsed: Duration, limit: Duration) -> bool {
    let in_time = elapsed <= limit;
    let verdict = if pass && in_time { "PASS" } else { "FAIL" };
    println!(
        "criterion {id:<3} {verdict}  {name}: {detail} [{:.2}s, limit {}s]",
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass && in_time
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn linear(d: usize, n: usize, seed: u64) -> (Dataset, Vec<respclass::GroundTruthUnit>) {
    generate(&ScenarioSpec::new(ScenarioKind::Linear, d, n, seed).unwrap()).unwrap()
}

#[test]
fn criterion_01_weight_structure() {
    let start = Instant::now();
    // All four (t, y) combinations, repeated, under Q = 1/2 and θ = 1/2.
    let t = [1, 1, -1, -1, 1, -1];
    let y = [1, -1, 1, -1, -1, -1];
    let ds = Dataset::new(1, vec![0.0; 6], &t, &y, Propensity::Constant(0.5)).unwrap();
    let ex = to_surrogate(&ds, Theta::new(0.5).unwrap());
    let mut pass = true;
    for i in 0..ex.len() {
        let expected = if ex.label(i) == Sign::Pos { 1.0 } else { 3.0 };
        pass &= ex.weight(i) == expected;
        pass &= ex.label(i) == Sign::of((y[i] * t[i]) as f64);
    }
    let ratio = ex.weights().iter().cloned().fold(f64::MIN, f64::max) / ex.weights().iter().cloned().fold(f64::MAX, f64::min);
    pass &= ratio == 3.0;
    let detail = format!("weights {:?}, ratio {ratio} (expected exactly 3 to 1)", ex.weights());
    assert!(report("1", "weight structure", pass, &detail, start.elapsed(), secs(1)));
}

#[test]
fn criterion_02_unbiased_loss_estimate() {
    let start = Instant::now();
    // f = sign(x1) errs exactly where the responder coin goes against the
    // side of x1: P(f=+1, R=-1) = P(f=-1, R=+1) = 1/2 · 0.15, so at θ = 1/2
    // L = θ·FP + (1 − θ)·FN = 0.075.
    let (fp, fn_) = (0.5 * 0.15, 0.5 * 0.15);
    let oracle = 0.5 * fp + 0.5 * fn_;
    let f = |x: &[f64]| if x[0] > 0.0 { Sign::Pos } else { Sign::Neg };
    let theta = Theta::new(0.5).unwrap();
    let draws: Vec<f64> = (0..200)
        .map(|r| {
            let (ds, _) = linear(2, 2000, child_seed(2024, &[r]));
            estimate_losses(&f, &ds, theta).unwrap().l_theta_hat
        })
        .collect();
    let m = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / m;
    let sd = (draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    let se = sd / m.sqrt();
    let pass = (mean - oracle).abs() <= 3.0 * se;
    let detail = format!("mean L̂ = {mean:.5}, oracle {oracle}, |diff| = {:.2e} vs 3 SE = {:.2e}", (mean - oracle).abs(), 3.0 * se);
    assert!(report("2", "unbiased estimator vs analytic oracle", pass, &detail, start.elapsed(), secs(30)));
}

#[test]
fn criterion_03_corrupted_label_frequencies() {
    let start = Instant::now();
    let (ds, _) = linear(2, 100_000, 33);
    let mut pass = true;
    let mut parts = Vec::new();
    for (rho, side) in [(0.15, false), (0.85, true)] {
        let rows: Vec<usize> = (0..ds.len()).filter(|&i| (ds.row(i)[0] > 0.0) == side).collect();
        let hits = rows.iter().filter(|&&i| (ds.outcome(i) * ds.treatment(i)) == Sign::Pos).count();
        let n = rows.len() as f64;
        let p = hits as f64 / n;
        let target = (1.0 + rho) / 2.0;
        let se = (target * (1.0 - target) / n).sqrt();
        pass &= (p - target).abs() <= 3.0 * se;
        parts.push(format!("ρ={rho}: P̂(Z=+1)={p:.4} vs {target} (3 SE {:.4})", 3.0 * se));
    }
    assert!(report("3", "corrupted-label frequencies", pass, &parts.join("; "), start.elapsed(), secs(30)));
}

/// Golden-section minimizer of a unimodal function on `[lo, hi]`.
fn argmin(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > 1e-12 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    (lo + hi) / 2.0
}

fn rho_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 0.05).collect()
}

/// Largest |argmin − ρ| over the grid for the expected loss under
/// P(Z = +1) = (1 + ρ)/2.
fn fisher_gap(loss: impl Fn(f64, Sign) -> f64 + Copy) -> (f64, Vec<(f64, f64)>) {
    let mut worst = 0.0f64;
    let mut minimizers = Vec::new();
    for rho in rho_grid() {
        let pi = (1.0 + rho) / 2.0;
        let risk = |r: f64| pi * loss(r, Sign::Pos) + (1.0 - pi) * loss(r, Sign::Neg);
        let r = argmin(risk, 1e-9, 1.0 - 1e-9);
        worst = worst.max((r - rho).abs());
        minimizers.push((rho, r));
    }
    (worst, minimizers)
}

#[test]
fn criterion_04_loss_curve_identities() {
    let start = Instant::now();
    let branch_gap = (0..1000)
        .map(|i| i as f64 / 1000.0)
        .map(|rho| (adjusted_nll(rho, Sign::Neg) - wce(rho, Sign::Neg)).abs())
        .fold(0.0, f64::max);
    let (nll_gap, _) = fisher_gap(generative_nll);
    let pass = branch_gap <= 1e-12 && nll_gap <= 1e-6;
    let detail = format!("max |adjusted_nll − wce| on Z=−1 = {branch_gap:.1e}; NLL argmin max deviation = {nll_gap:.1e}");
    assert!(report("4a", "loss identities and NLL Fisher consistency", pass, &detail, start.elapsed(), secs(5)));

    let start = Instant::now();
    let (wce_gap, minimizers) = fisher_gap(wce);
    // Reported, not asserted: see `criterion_04_wce_fisher_consistency_strict`.
    let closed_form = minimizers.iter().map(|&(rho, r)| (r - (1.0 + rho) / (4.0 - 2.0 * rho)).abs()).fold(0.0, f64::max);
    let detail = format!(
        "WCE argmin max deviation from ρ = {wce_gap:.3} (tolerance 1e-6); minimizer matches (1+ρ)/(4−2ρ) to {closed_form:.1e}"
    );
    report("4b", "WCE Fisher consistency on the ρ grid", wce_gap <= 1e-6, &detail, start.elapsed(), secs(5));
    let same_side = minimizers.iter().all(|&(rho, r)| {
        if (rho - 0.5).abs() < 1e-9 {
            (r - 0.5).abs() <= 1e-6
        } else {
            (rho - 0.5).signum() == (r - 0.5).signum()
        }
    });
    println!("criterion 4b  info  WCE minimizer lies on the same side of 1/2 as ρ at every grid point: {same_side}");
    assert!(same_side);
}

#[test]
#[ignore = "unattainable as stated: the expected-WCE minimizer is (1+ρ)/(4−2ρ), which equals ρ only at 1/2"]
fn criterion_04_wce_fisher_consistency_strict() {
    let (gap, _) = fisher_gap(wce);
    assert!(gap <= 1e-6, "WCE argmin deviates from ρ by up to {gap}");
}

#[test]
fn criterion_05_policy_value_identity() {
    let start = Instant::now();
    let (_, units) = linear(3, 1000, 55);
    let es: Vec<f64> = (0..units.len()).map(|i| [0.3, 0.5, 0.7][i % 3]).collect();
    let target_base = units.iter().map(|u| u.y_plus.value() + u.y_minus.value()).sum::<f64>() / units.len() as f64;
    let mut rng = seeded(5);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let w: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: f64 = rng.gen_range(-0.5..0.5);
        let theta = Theta::new(rng.gen_range(0.0..1.0)).unwrap();
        let f = move |x: &[f64]| Sign::of(x.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>() + b);
        let (l_prime, u) = exact_treatment_expectation(&f, &units, &es, theta).unwrap();
        worst = worst.max((l_prime + 2.0 * u - (target_base - 2.0 * theta.value())).abs());
    }
    let pass = worst <= 1e-12;
    let detail = format!("max |L′ + 2U − (mean(y⁺ + y⁻) − 2θ)| over 5 classifiers = {worst:.1e}");
    assert!(report("5", "L′ + 2U identity", pass, &detail, start.elapsed(), secs(5)));
}

/// Dual objective `Σα − ½ αᵀQα`, `Q_ij = z_i z_j K_ij`.
fn dual_objective(alpha: &[f64], q: &DMatrix<f64>) -> f64 {
    let a = DVector::from_column_slice(alpha);
    a.sum() - 0.5 * (a.transpose() * q * &a)[(0, 0)]
}

/// Exact maximizer of the box-constrained dual by enumerating which
/// variables sit at 0, at their bound, or strictly inside.
fn brute_force_dual(q: &DMatrix<f64>, z: &[f64], upper: &[f64]) -> f64 {
    let n = z.len();
    let mut best = f64::NEG_INFINITY;
    for code in 0..3usize.pow(n as u32) {
        let state: Vec<usize> = (0..n).map(|i| code / 3usize.pow(i as u32) % 3).collect();
        let mut alpha: Vec<f64> = (0..n).map(|i| if state[i] == 1 { upper[i] } else { 0.0 }).collect();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let m = free.len();
        // Stationarity on the face: Q_FF α_F + b z_F = 1 − Q_F,fixed α_fixed,
        // and the balance z_Fᵀ α_F = −z_fixedᵀ α_fixed.
        let mut a = DMatrix::zeros(m + 1, m + 1);
        let mut rhs = DVector::zeros(m + 1);
        for (r, &i) in free.iter().enumerate() {
            for (c, &j) in free.iter().enumerate() {
                a[(r, c)] = q[(i, j)];
            }
            a[(r, m)] = z[i];
            a[(m, r)] = z[i];
            rhs[r] = 1.0 - (0..n).filter(|j| state[*j] != 2).map(|j| q[(i, j)] * alpha[j]).sum::<f64>();
        }
        rhs[m] = -(0..n).filter(|j| state[*j] != 2).map(|j| z[j] * alpha[j]).sum::<f64>();
        let svd = a.clone().svd(true, true);
        let Ok(sol) = svd.solve(&rhs, 1e-12) else { continue };
        if (&a * &sol - &rhs).norm() > 1e-9 {
            continue;
        }
        for (r, &i) in free.iter().enumerate() {
            alpha[i] = sol[r];
        }
        let feasible = free.iter().all(|&i| alpha[i] >= -1e-12 && alpha[i] <= upper[i] + 1e-12)
            && (0..n).map(|i| z[i] * alpha[i]).sum::<f64>().abs() < 1e-9;
        if feasible {
            best = best.max(dual_objective(&alpha, q));
        }
    }
    best
}

fn random_surrogate(rng: &mut impl Rng, n: usize, d: usize) -> WeightedExamples {
    loop {
        let x: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let t: Vec<i64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        let y: Vec<i64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        let e: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..0.8)).collect();
        let ds = Dataset::new(d, x, &t, &y, Propensity::PerObservation(e)).unwrap();
        let ex = to_surrogate(&ds, Theta::new(rng.gen_range(0.1..0.9)).unwrap());
        let kept: Vec<Sign> = (0..n).filter(|&i| ex.weight(i) > 0.0).map(|i| ex.label(i)).collect();
        if kept.contains(&Sign::Pos) && kept.contains(&Sign::Neg) {
            return ex;
        }
    }
}

#[test]
fn criterion_06_svm_solver_oracle() {
    let start = Instant::now();
    let mut rng = seeded(66);
    let mut worst_obj = 0.0f64;
    let mut worst_kkt = 0.0f64;
    let mut pass = true;
    for instance in 0..10 {
        let n = rng.gen_range(3..=6);
        let ex = random_surrogate(&mut rng, n, 2);
        let kernel = if instance % 2 == 0 { KernelSpec::Linear } else { KernelSpec::Rbf { gamma: 0.7 } };
        let params = SvmParams { c: rng.gen_range(0.2..5.0), tol: 1e-7, ..SvmParams::default() };
        let fit = train_respsvm(&ex, kernel, &params).unwrap();
        let keep: Vec<usize> = (0..n).filter(|&i| ex.weight(i) > 0.0).collect();
        let z: Vec<f64> = keep.iter().map(|&i| ex.label(i).value()).collect();
        let upper: Vec<f64> = keep.iter().map(|&i| params.c * ex.weight(i)).collect();
        let q = DMatrix::from_fn(keep.len(), keep.len(), |a, b| {
            z[a] * z[b] * kernel.eval(ex.row(keep[a]), ex.row(keep[b]))
        });
        let oracle = brute_force_dual(&q, &z, &upper);
        let alpha: Vec<f64> = keep.iter().map(|&i| fit.alpha[i]).collect();
        let gap = (dual_objective(&alpha, &q) - oracle).abs().max((fit.dual_objective - oracle).abs());
        worst_obj = worst_obj.max(gap);
        worst_kkt = worst_kkt.max(fit.kkt_gap);
        pass &= gap <= 1e-4 && fit.converged && fit.kkt_gap <= params.tol;
    }

    // Listing every example twice is the same problem as doubling its weight.
    let ex = random_surrogate(&mut rng, 30, 2);
    let twice = WeightedExamples::new(
        2,
        [ex.features(), ex.features()].concat(),
        [ex.labels(), ex.labels()].concat(),
        [ex.weights(), ex.weights()].concat(),
    )
    .unwrap();
    let kernel = KernelSpec::Rbf { gamma: 0.5 };
    let params = SvmParams { c: 1.0, tol: 1e-8, ..SvmParams::default() };
    let a = train_respsvm(&twice, kernel, &params).unwrap();
    let b = train_respsvm(&ex.scaled(2.0), kernel, &params).unwrap();
    let grid: Vec<[f64; 2]> =
        (0..10).flat_map(|i| (0..10).map(move |j| [-2.0 + 4.0 * i as f64 / 9.0, -2.0 + 4.0 * j as f64 / 9.0])).collect();
    let agree = grid.iter().filter(|x| Sign::of(a.scorer.score(*x)) == Sign::of(b.scorer.score(*x))).count();
    let margin_gap = grid.iter().map(|x| (a.scorer.score(x) - b.scorer.score(x)).abs()).fold(0.0, f64::max);
    pass &= agree == grid.len();
    let detail = format!(
        "max dual gap to brute force {worst_obj:.1e} (≤ 1e-4), max KKT gap {worst_kkt:.1e} (≤ tol 1e-7), replicated vs doubled: {agree}/100 agree, max margin diff {margin_gap:.1e}"
    );
    assert!(report("6", "SVM solver oracle", pass, &detail, start.elapsed(), secs(30)));
}

fn relative_error(net: &MlpScorer, ex: &WeightedExamples, objective: Objective, l2: f64) -> f64 {
    let analytic = objective_gradient(net, ex, objective, l2);
    let h = 1e-5;
    let numeric: Vec<f64> = (0..net.params().len())
        .map(|k| {
            let mut plus = net.clone();
            plus.params_mut()[k] += h;
            let mut minus = net.clone();
            minus.params_mut()[k] -= h;
            (objective_value(&plus, ex, objective, l2) - objective_value(&minus, ex, objective, l2)) / (2.0 * h)
        })
        .collect();
    let diff: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale = analytic.iter().map(|a| a * a).sum::<f64>().sqrt().max(numeric.iter().map(|a| a * a).sum::<f64>().sqrt());
    diff / scale.max(1e-12)
}

#[test]
fn criterion_07_gradient_correctness() {
    let start = Instant::now();
    let (ds, _) = linear(3, 60, 77);
    let disc = to_surrogate(&ds, Theta::new(0.4).unwrap());
    let gen = generative_examples(&ds);
    let mut worst = 0.0f64;
    for seed in [1, 2, 3] {
        for sizes in [vec![3, 1], vec![3, 6, 3, 1]] {
            for (head, objective, ex) in
                [(Head::Identity, Objective::Logistic, &disc), (Head::Sigmoid, Objective::Generative, &gen)]
            {
                let net = MlpScorer::glorot(&sizes, head, seed).unwrap();
                worst = worst.max(relative_error(&net, ex, objective, 0.0));
                worst = worst.max(relative_error(&net, ex, objective, 0.01));
            }
        }
    }
    let pass = worst <= 1e-5;
    let detail = format!("max relative error {worst:.1e} over disc/gen heads, 0 and 2 hidden layers, 3 seeds");
    assert!(report("7", "backprop vs central differences", pass, &detail, start.elapsed(), secs(10)));
}

fn run_benchmark(spec: &ExperimentSpec) -> Vec<ReplicationSummary> {
    let records = with_pool(worker_count(None), || run_replications(spec)).unwrap().unwrap();
    summarize(spec, &records)
}

fn mean_of(summary: &[ReplicationSummary], learner: LearnerKind) -> (f64, usize) {
    let s = summary.iter().find(|s| s.learner == learner).unwrap();
    (s.mean, s.failures)
}

#[test]
fn criterion_08_learner_recovery_linear() {
    let start = Instant::now();
    let learners = vec![LearnerKind::RespLrGen, LearnerKind::RespSvmLinear];
    let spec = ExperimentSpec::new(ScenarioKind::Linear, 2, learners.clone(), vec![4000], 20, 8);
    let summary = run_benchmark(&spec);
    let mut pass = true;
    let mut parts = Vec::new();
    for learner in learners {
        let (mean, failures) = mean_of(&summary, learner);
        pass &= mean >= 0.90 && failures == 0;
        parts.push(format!("{learner} {mean:.4} ({failures} failed)"));
    }
    let detail = format!("mean Bayes-label accuracy over 20 replications: {} (≥ 0.90)", parts.join(", "));
    assert!(report("8", "learner recovery, linear scenario", pass, &detail, start.elapsed(), secs(600)));
}

#[test]
fn criterion_09_nonlinearity_separation() {
    let start = Instant::now();
    let spec = ExperimentSpec::new(
        ScenarioKind::Spherical,
        2,
        vec![LearnerKind::RespSvmRbf, LearnerKind::RespLrGen],
        vec![4000],
        20,
        9,
    );
    let summary = run_benchmark(&spec);
    let (svm, svm_failed) = mean_of(&summary, LearnerKind::RespSvmRbf);
    let (lr, lr_failed) = mean_of(&summary, LearnerKind::RespLrGen);
    let pass = svm - lr >= 0.05 && svm_failed + lr_failed == 0;
    let detail = format!("respsvm-rbf {svm:.4} vs resplr-gen {lr:.4}: margin {:.4} (≥ 0.05)", svm - lr);
    assert!(report("9", "nonlinearity separation, spherical scenario", pass, &detail, start.elapsed(), secs(1200)));
}

fn constants_gap(ds: &Dataset) -> f64 {
    let theta = balanced_theta(ds).unwrap();
    let pos = estimate_losses(&ResponderClassifier::Constant(Sign::Pos), ds, theta).unwrap();
    let neg = estimate_losses(&ResponderClassifier::Constant(Sign::Neg), ds, theta).unwrap();
    (pos.l_theta_hat - neg.l_theta_hat).abs()
}

fn arb_dataset() -> impl Strategy<Value = Dataset> {
    (1usize..200).prop_flat_map(|n| {
        (
            prop::collection::vec(-3.0f64..3.0, n),
            prop::collection::vec(prop::bool::ANY, n),
            prop::collection::vec(prop::bool::weighted(0.7), n),
            prop::collection::vec(0.05f64..0.95, n),
        )
            .prop_map(move |(x, t, agree, e)| {
                let t: Vec<i64> = t.iter().map(|&b| if b { 1 } else { -1 }).collect();
                let y: Vec<i64> = t.iter().zip(&agree).map(|(&t, &a)| if a { t } else { -t }).collect();
                Dataset::new(1, x, &t, &y, Propensity::PerObservation(e)).unwrap()
            })
    })
}

#[test]
fn criterion_10_balanced_theta() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let (ds, _) = linear(2, 500, 1000 + seed);
        worst = worst.max(constants_gap(&ds));
    }
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() });
    let outcome = runner.run(&arb_dataset(), |ds| {
        // Only the balancing value inside [0, 1] is a valid θ.
        let v = balancing_value(&ds).unwrap();
        prop_assume!((0.0..=1.0).contains(&v));
        prop_assert!(constants_gap(&ds) <= 1e-12);
        Ok(())
    });
    let pass = worst <= 1e-12 && outcome.is_ok();
    let detail = format!(
        "max |L̂(+1) − L̂(−1)| on simulated data {worst:.1e}; 256 random weighted datasets: {}",
        match &outcome {
            Ok(()) => "all within 1e-12".to_string(),
            Err(e) => e.to_string(),
        }
    );
    assert!(report("10", "balanced θ equalizes the constant rules", pass, &detail, start.elapsed(), secs(1)));
}

fn respclass(dir: &Path, args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_respclass")).args(args).current_dir(dir).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for entry in fs::read_dir(&p).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let name = path.strip_prefix(dir).unwrap().display().to_string();
                files.push((name, fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn criterion_11_cli_determinism() {
    let start = Instant::now();
    let bench = "scenario = spherical\nd = 2\nn = 150\nlearner = respsvm-rbf\nlearner = resplr-gen\nreplications = 2\nseed = 5\ntest_size = 500\n";
    let runs: Vec<Vec<(String, Vec<u8>)>> = (0..2)
        .map(|_| {
            let tmp = tempfile::TempDir::new().unwrap();
            let dir = tmp.path();
            fs::write(dir.join("bench.cfg"), bench).unwrap();
            respclass(dir, &["simulate", "--scenario", "linear", "--d", "2", "--n", "300", "--seed", "7"]);
            respclass(dir, &["train", "--data", "data.csv", "--learner", "resplr-gen", "--out", "lr.txt"]);
            respclass(dir, &["train", "--data", "data.csv", "--learner", "respsvm", "--kernel", "rbf", "--out", "svm.txt"]);
            respclass(dir, &["benchmark", "--config", "bench.cfg", "--out-dir", "bench"]);
            snapshot(dir)
        })
        .collect();
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    let identical = runs[0] == runs[1];
    let detail = format!("{} output files compared byte for byte: {}", names.len(), if identical { "identical" } else { "differ" });
    assert!(report("11", "CLI determinism", identical && names.len() >= 12, &detail, start.elapsed(), secs(60)));
}
