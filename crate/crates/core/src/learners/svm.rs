//! RespSVM: a sample-weighted soft-margin SVM trained on surrogate labels.
//!
//! The dual problem is
//!
//! ```text
//! minimize   ½ αᵀQα - Σ α_i      with Q_ij = z_i z_j k(x_i, x_j)
//! subject to 0 ≤ α_i ≤ C·w_i,   Σ α_i z_i = 0
//! ```
//!
//! so an example's weight only scales its box constraint. It is solved by
//! sequential minimal optimization: each iteration picks the pair of
//! variables that most violates the KKT conditions (second-order working set
//! selection) and solves the two-variable subproblem in closed form.

use super::kernel::{GramMatrix, KernelCache, KernelSpec, RowSource};
use super::scorer::KernelScorer;
use crate::data::Sign;
use crate::error::{Error, Result};
use crate::surrogate::WeightedExamples;

const TAU: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SvmParams {
    /// Box scale: example `i` gets the bound `C · w_i`.
    pub c: f64,
    /// Stop when the maximal KKT violation falls below this.
    pub tol: f64,
    /// Pair updates before giving up; `None` uses `max(10·n², 100 000)`
    /// capped at 50 million.
    pub max_iter: Option<usize>,
    /// Memory budget for cached kernel rows.
    pub cache_bytes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 1.0, tol: 1e-3, max_iter: None, cache_bytes: 256 << 20 }
    }
}

impl SvmParams {
    pub fn with_c(c: f64) -> Self {
        Self { c, ..Self::default() }
    }
}

/// Trained model plus solver diagnostics.
#[derive(Clone, Debug)]
pub struct SvmFit {
    pub scorer: KernelScorer,
    /// False when `max_iter` ran out first; the scorer is the last iterate.
    pub converged: bool,
    pub iterations: usize,
    /// Maximal KKT violation at termination.
    pub kkt_gap: f64,
    /// Dual objective `Σα - ½ αᵀQα` at termination.
    pub dual_objective: f64,
    /// Mean weighted hinge loss of the returned scorer on its training data.
    pub training_loss: f64,
    /// Dual variable of every training example (zero for dropped rows).
    pub alpha: Vec<f64>,
    /// Training-row index of each support vector, aligned with the
    /// scorer's dual coefficients.
    pub support_indices: Vec<usize>,
}

/// Dual solution over the rows handed to the solver.
pub(crate) struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
    pub kkt_gap: f64,
    pub dual_objective: f64,
    /// Decision values `h(x_t)` at the training points.
    pub decision: Vec<f64>,
}

fn default_max_iter(n: usize) -> usize {
    (10usize.saturating_mul(n).saturating_mul(n)).clamp(100_000, 50_000_000)
}

/// SMO state over labels `z` and per-example upper bounds.
///
/// Follows the classic decomposition scheme: second-order working-set
/// selection, and shrinking of variables stuck at a bound with periodic
/// reconstruction of their gradients from `g_bar = Σ_{α_j = u_j} u_j Q_·j`.
struct Smo<'c, 'a> {
    z: &'c [f64],
    upper: &'c [f64],
    cache: &'c mut KernelCache<'a>,
    diag: Vec<f64>,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    g_bar: Vec<f64>,
    active: Vec<usize>,
    unshrunk: bool,
}

enum Selection {
    Optimal(f64),
    Pair(usize, usize),
}

impl Smo<'_, '_> {
    fn at_upper(&self, t: usize) -> bool {
        self.alpha[t] >= self.upper[t]
    }

    fn at_lower(&self, t: usize) -> bool {
        self.alpha[t] <= 0.0
    }

    fn in_up(&self, t: usize) -> bool {
        if self.z[t] > 0.0 {
            !self.at_upper(t)
        } else {
            !self.at_lower(t)
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if self.z[t] > 0.0 {
            !self.at_lower(t)
        } else {
            !self.at_upper(t)
        }
    }

    /// Gradients and `g_bar` for a nonzero starting point.
    fn init_gradients(&mut self) {
        let n = self.z.len();
        for s in 0..n {
            if self.at_lower(s) {
                continue;
            }
            let row = self.cache.row(s);
            let (a, zs) = (self.alpha[s], self.z[s]);
            let at_upper = a >= self.upper[s];
            for t in 0..n {
                let q = zs * self.z[t] * row[t];
                self.grad[t] += a * q;
                if at_upper {
                    self.g_bar[t] += self.upper[s] * q;
                }
            }
        }
    }

    fn select(&mut self, tol: f64) -> Selection {
        let (z, grad) = (self.z, &self.grad);
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for &t in &self.active {
            if self.in_up(t) {
                let v = -z[t] * grad[t];
                if v >= gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        if let Some(i) = i_sel {
            let kii = self.diag[i];
            let row_i = self.cache.row(i);
            let mut best = f64::INFINITY;
            for &t in &self.active {
                let low = if z[t] > 0.0 { self.alpha[t] > 0.0 } else { self.alpha[t] < self.upper[t] };
                if !low {
                    continue;
                }
                let zg = z[t] * self.grad[t];
                gmax2 = gmax2.max(zg);
                let b = gmax + zg;
                if b > 0.0 {
                    let a = kii + self.diag[t] - 2.0 * row_i[t];
                    let a = if a > 0.0 { a } else { TAU };
                    let score = -(b * b) / a;
                    if score <= best {
                        best = score;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let gap = gmax + gmax2;
        match (i_sel, j_sel) {
            (Some(i), Some(j)) if gap >= tol => Selection::Pair(i, j),
            _ => Selection::Optimal(gap.max(0.0)),
        }
    }

    fn update(&mut self, i: usize, j: usize) {
        let (z, upper) = (self.z, self.upper);
        let (was_upper_i, was_upper_j) = (self.at_upper(i), self.at_upper(j));
        let (kii, kjj) = (self.diag[i], self.diag[j]);
        let (ri, rj) = self.cache.pair(i, j);
        let kij = ri[j];
        let (ci, cj) = (upper[i], upper[j]);
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        // Curvature along the feasible direction; the same for both label cases.
        let quad = kii + kjj - 2.0 * kij;
        let quad = if quad > 0.0 { quad } else { TAU };
        let (gi, gj) = (self.grad[i], self.grad[j]);
        if z[i] != z[j] {
            let delta = (-gi - gj) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > ci - cj {
                if ai > ci {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if aj > cj {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            let delta = (gi - gj) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > ci {
                if ai > ci {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > cj {
                if aj > cj {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let di = (ai - old_i) * z[i];
        let dj = (aj - old_j) * z[j];
        for &t in &self.active {
            self.grad[t] += z[t] * (ri[t] * di + rj[t] * dj);
        }
        for (s, row, was_upper) in [(i, ri, was_upper_i), (j, rj, was_upper_j)] {
            let now_upper = self.alpha[s] >= upper[s];
            if was_upper != now_upper {
                let step = if now_upper { upper[s] } else { -upper[s] } * z[s];
                for t in 0..z.len() {
                    self.g_bar[t] += step * z[t] * row[t];
                }
            }
        }
    }

    fn be_shrunk(&self, t: usize, gmax1: f64, gmax2: f64) -> bool {
        let g = self.grad[t];
        if self.at_upper(t) {
            if self.z[t] > 0.0 {
                -g > gmax1
            } else {
                -g > gmax2
            }
        } else if self.at_lower(t) {
            if self.z[t] > 0.0 {
                g > gmax2
            } else {
                g > gmax1
            }
        } else {
            false
        }
    }

    fn shrink(&mut self, tol: f64) {
        let (mut gmax1, mut gmax2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &t in &self.active {
            let zg = self.z[t] * self.grad[t];
            if self.in_up(t) {
                gmax1 = gmax1.max(-zg);
            }
            if self.in_low(t) {
                gmax2 = gmax2.max(zg);
            }
        }
        if !self.unshrunk && gmax1 + gmax2 <= 10.0 * tol {
            self.unshrunk = true;
            self.reconstruct();
        }
        let keep: Vec<usize> = self.active.iter().copied().filter(|&t| !self.be_shrunk(t, gmax1, gmax2)).collect();
        self.active = keep;
    }

    /// Restores exact gradients of shrunk variables and reactivates them.
    fn reconstruct(&mut self) {
        let n = self.z.len();
        if self.active.len() == n {
            return;
        }
        let mut is_active = vec![false; n];
        for &t in &self.active {
            is_active[t] = true;
        }
        let inactive: Vec<usize> = (0..n).filter(|&t| !is_active[t]).collect();
        for &t in &inactive {
            self.grad[t] = self.g_bar[t] - 1.0;
        }
        for s in 0..n {
            if self.at_lower(s) || self.at_upper(s) {
                continue;
            }
            let row = self.cache.row(s);
            let coef = self.alpha[s] * self.z[s];
            for &t in &inactive {
                self.grad[t] += coef * self.z[t] * row[t];
            }
        }
        self.active = (0..n).collect();
    }
}

/// Solves the dual from `init` (zero when `None`), which must be feasible.
pub(crate) fn solve_dual(
    z: &[f64],
    upper: &[f64],
    cache: &mut KernelCache<'_>,
    tol: f64,
    max_iter: usize,
    init: Option<&[f64]>,
) -> DualSolution {
    let n = z.len();
    debug_assert_eq!(cache.len(), n);
    let diag: Vec<f64> = (0..n).map(|t| cache.diag(t)).collect();
    let alpha = match init {
        Some(a) => {
            debug_assert!(a.iter().zip(upper).all(|(&a, &u)| (0.0..=u).contains(&a)));
            a.to_vec()
        }
        None => vec![0.0; n],
    };
    let mut smo = Smo {
        z,
        upper,
        cache,
        diag,
        alpha,
        grad: vec![-1.0; n],
        g_bar: vec![0.0; n],
        active: (0..n).collect(),
        unshrunk: false,
    };
    if init.is_some() {
        smo.init_gradients();
    }

    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut counter = n.min(1000) + 1;
    while iterations < max_iter {
        counter -= 1;
        if counter == 0 {
            counter = n.min(1000);
            smo.shrink(tol);
        }
        let (i, j) = match smo.select(tol) {
            Selection::Pair(i, j) => (i, j),
            Selection::Optimal(g) => {
                gap = g;
                if smo.active.len() == n {
                    converged = true;
                    break;
                }
                // Optimal on the shrunk problem; check the full one.
                smo.reconstruct();
                match smo.select(tol) {
                    Selection::Pair(i, j) => {
                        counter = 1;
                        (i, j)
                    }
                    Selection::Optimal(g) => {
                        gap = g;
                        converged = true;
                        break;
                    }
                }
            }
        };
        smo.update(i, j);
        iterations += 1;
    }
    smo.reconstruct();
    if !converged {
        gap = kkt_gap(z, &smo.alpha, upper, &smo.grad);
    }

    let Smo { alpha, grad, .. } = smo;
    let bias = -offset(z, &alpha, upper, &grad);
    let dual_objective = -0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();
    // G = Qα - 1, so Σ_s α_s z_s k(x_s, x_t) = z_t (G_t + 1).
    let decision = z.iter().zip(&grad).map(|(z, g)| z * (g + 1.0) + bias).collect();
    DualSolution { alpha, bias, converged, iterations, kkt_gap: gap, dual_objective, decision }
}

/// Maximal violating-pair gap `max_up(-z G) - min_low(-z G)`.
fn kkt_gap(z: &[f64], alpha: &[f64], upper: &[f64], grad: &[f64]) -> f64 {
    let (mut up, mut low) = (f64::NEG_INFINITY, f64::INFINITY);
    for t in 0..z.len() {
        let v = -z[t] * grad[t];
        let (is_up, is_low) = if z[t] > 0.0 {
            (alpha[t] < upper[t], alpha[t] > 0.0)
        } else {
            (alpha[t] > 0.0, alpha[t] < upper[t])
        };
        if is_up {
            up = up.max(v);
        }
        if is_low {
            low = low.min(v);
        }
    }
    (up - low).max(0.0)
}

/// The decision-function offset `ρ` with `h(x) = Σ α_i z_i k(x_i, x) - ρ`.
fn offset(z: &[f64], alpha: &[f64], upper: &[f64], grad: &[f64]) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..z.len() {
        let yg = z[t] * grad[t];
        if alpha[t] >= upper[t] {
            if z[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if z[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / 2.0
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        0.0
    }
}

fn positive_rows(examples: &WeightedExamples) -> Result<Vec<usize>> {
    let keep: Vec<usize> = (0..examples.len()).filter(|&i| examples.weight(i) > 0.0).collect();
    let pos = keep.iter().any(|&i| examples.label(i) == Sign::Pos);
    let neg = keep.iter().any(|&i| examples.label(i) == Sign::Neg);
    if !(pos && neg) {
        return Err(Error::SingleClass("RespSVM needs positively weighted examples of both labels".into()));
    }
    Ok(keep)
}

fn validate(params: &SvmParams) -> Result<()> {
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::InvalidConfig(format!("C must be positive, got {}", params.c)));
    }
    if !(params.tol > 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", params.tol)));
    }
    Ok(())
}

fn finish(examples: &WeightedExamples, keep: &[usize], kernel: KernelSpec, sol: DualSolution) -> SvmFit {
    let d = examples.dim();
    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    let mut support_indices = Vec::new();
    let mut alpha = vec![0.0; examples.len()];
    let mut loss = 0.0;
    for (k, &row) in keep.iter().enumerate() {
        let a = sol.alpha[k];
        alpha[row] = a;
        if a > 0.0 {
            support_vectors.extend_from_slice(examples.row(row));
            dual_coefs.push(a * examples.label(row).value());
            support_indices.push(row);
        }
        loss += examples.weight(row) * crate::losses::hinge(sol.decision[k], examples.label(row));
    }
    SvmFit {
        scorer: KernelScorer::new(d, support_vectors, dual_coefs, sol.bias, kernel),
        converged: sol.converged,
        iterations: sol.iterations,
        kkt_gap: sol.kkt_gap,
        dual_objective: sol.dual_objective,
        training_loss: loss / examples.len() as f64,
        alpha,
        support_indices,
    }
}

/// Trains RespSVM on surrogate examples. Zero-weight examples are dropped.
///
/// Running out of iterations is not an error: the last iterate is returned
/// with `converged == false`.
pub fn train_respsvm(examples: &WeightedExamples, kernel: KernelSpec, params: &SvmParams) -> Result<SvmFit> {
    validate(params)?;
    let keep = positive_rows(examples)?;
    let sub = examples.subset(&keep);
    let z: Vec<f64> = sub.labels().iter().map(|s| s.value()).collect();
    let upper: Vec<f64> = sub.weights().iter().map(|w| params.c * w).collect();
    let mut cache = KernelCache::new(
        RowSource::Compute { features: sub.features(), d: sub.dim(), kernel },
        params.cache_bytes,
    );
    let max_iter = params.max_iter.unwrap_or_else(|| default_max_iter(keep.len()));
    let sol = solve_dual(&z, &upper, &mut cache, params.tol, max_iter, None);
    Ok(finish(examples, &keep, kernel, sol))
}

/// Like [`train_respsvm`], reading kernel values from a precomputed matrix.
/// `rows[i]` is the index in `gram` of `examples` row `i`.
///
/// `warm_start` optionally gives a feasible starting value for every dual
/// variable (`0 ≤ α_i ≤ C·w_i`, `Σ α_i z_i = 0`), for example a solution at
/// a smaller `C` scaled up by the ratio of the two `C` values.
pub fn train_respsvm_with_gram(
    examples: &WeightedExamples,
    rows: &[usize],
    gram: &GramMatrix,
    kernel: KernelSpec,
    params: &SvmParams,
    warm_start: Option<&[f64]>,
) -> Result<SvmFit> {
    validate(params)?;
    if rows.len() != examples.len() {
        return Err(Error::LengthMismatch { left: rows.len(), right: examples.len() });
    }
    let keep = positive_rows(examples)?;
    let index: Vec<usize> = keep.iter().map(|&i| rows[i]).collect();
    let z: Vec<f64> = keep.iter().map(|&i| examples.label(i).value()).collect();
    let upper: Vec<f64> = keep.iter().map(|&i| params.c * examples.weight(i)).collect();
    let init = match warm_start {
        Some(alpha) => Some(feasible_start(alpha, examples, &keep, &z, &upper)?),
        None => None,
    };
    let mut cache = KernelCache::new(RowSource::Gram { gram, index: &index }, params.cache_bytes);
    let max_iter = params.max_iter.unwrap_or_else(|| default_max_iter(keep.len()));
    let sol = solve_dual(&z, &upper, &mut cache, params.tol, max_iter, init.as_deref());
    Ok(finish(examples, &keep, kernel, sol))
}

fn feasible_start(
    alpha: &[f64],
    examples: &WeightedExamples,
    keep: &[usize],
    z: &[f64],
    upper: &[f64],
) -> Result<Vec<f64>> {
    if alpha.len() != examples.len() {
        return Err(Error::LengthMismatch { left: alpha.len(), right: examples.len() });
    }
    let start: Vec<f64> = keep.iter().zip(upper).map(|(&i, &u)| alpha[i].min(u)).collect();
    let balance: f64 = start.iter().zip(z).map(|(a, z)| a * z).sum();
    let scale: f64 = start.iter().sum::<f64>().max(1.0);
    let dropped_mass = (0..examples.len()).any(|i| examples.weight(i) == 0.0 && alpha[i] != 0.0);
    if start.iter().any(|a| !(*a >= 0.0)) || balance.abs() > 1e-9 * scale || dropped_mass {
        return Err(Error::InvalidConfig("warm start is not dual feasible".into()));
    }
    Ok(start)
}
