//! Distribution functions needed by the synthetic scenarios.

/// CDF of Beta(4, 4): `Σ_{k=4}^{7} C(7,k) u^k (1-u)^{7-k}`.
///
/// Inputs slightly outside `[0, 1]` are clamped.
pub fn beta44_cdf(u: f64) -> f64 {
    const BINOM7: [f64; 8] = [1.0, 7.0, 21.0, 35.0, 35.0, 21.0, 7.0, 1.0];
    let u = u.clamp(0.0, 1.0);
    let v = 1.0 - u;
    (4..=7).map(|k| BINOM7[k] * u.powi(k as i32) * v.powi(7 - k as i32)).sum()
}

/// CDF of the chi-squared distribution with `d` degrees of freedom at `s`.
///
/// Even `d` uses the finite Poisson-sum form; odd `d` falls back to the
/// regularized lower incomplete gamma function `P(d/2, s/2)`.
pub fn chisq_cdf(s: f64, d: usize) -> f64 {
    assert!(d >= 1, "chi-squared needs at least one degree of freedom");
    if s <= 0.0 {
        return 0.0;
    }
    if s.is_infinite() {
        return 1.0;
    }
    let half = s / 2.0;
    if d % 2 == 0 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..d / 2 {
            term *= half / k as f64;
            sum += term;
        }
        (1.0 - (-half).exp() * sum).clamp(0.0, 1.0)
    } else {
        regularized_lower_gamma(d as f64 / 2.0, half)
    }
}

/// `ln Γ(a)` for `a` a positive integer or half-integer.
fn ln_gamma_half_integer(a: f64) -> f64 {
    let twice = (2.0 * a).round() as u64;
    debug_assert!(twice >= 1 && (2.0 * a - twice as f64).abs() < 1e-12);
    // Γ(1) = 1, Γ(1/2) = √π, Γ(a + 1) = a Γ(a).
    let (mut x, mut acc) = if twice % 2 == 0 { (1.0, 0.0) } else { (0.5, 0.5 * std::f64::consts::PI.ln()) };
    while x < a - 0.25 {
        acc += x.ln();
        x += 1.0;
    }
    acc
}

const GAMMA_TOL: f64 = 1e-15;
const GAMMA_MAX_ITER: usize = 10_000;

/// Regularized lower incomplete gamma `P(a, x)` for half-integer `a`.
///
/// Series expansion below `x = a + 1`, Lentz continued fraction for the
/// upper tail above it.
pub(crate) fn regularized_lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma_half_integer(a);
    if x < a + 1.0 {
        let mut denom = a;
        let mut term = 1.0 / a;
        let mut sum = term;
        for _ in 0..GAMMA_MAX_ITER {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term.abs() < sum.abs() * GAMMA_TOL {
                break;
            }
        }
        (sum * log_prefactor.exp()).clamp(0.0, 1.0)
    } else {
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..GAMMA_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < GAMMA_TOL {
                break;
            }
        }
        (1.0 - log_prefactor.exp() * h).clamp(0.0, 1.0)
    }
}
