//! Kernels and the row cache the SMO solver reads from.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelSpec {
    Linear,
    /// `k(x, x') = exp(-gamma ‖x - x'‖²)`.
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<KernelSpec> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(KernelSpec::Rbf { gamma })
        } else {
            Err(Error::InvalidConfig(format!("rbf gamma must be positive, got {gamma}")))
        }
    }

    /// RBF kernel with `gamma = 1 / (2 ℓ²)`.
    pub fn rbf_from_lengthscale(lengthscale: f64) -> Result<KernelSpec> {
        KernelSpec::rbf(1.0 / (2.0 * lengthscale * lengthscale))
    }

    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => a.iter().zip(b).map(|(u, v)| u * v).sum(),
            KernelSpec::Rbf { gamma } => {
                let sq: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
                (-gamma * sq).exp()
            }
        }
    }
}

/// Dense kernel matrix over a fixed set of rows, shared by every solve that
/// trains on a subset of them (cross-validation folds, refits).
#[derive(Clone, Debug)]
pub struct GramMatrix {
    n: usize,
    values: Vec<f64>,
}

impl GramMatrix {
    pub fn compute(features: &[f64], d: usize, kernel: KernelSpec) -> GramMatrix {
        let n = features.len() / d;
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            let xi = &features[i * d..(i + 1) * d];
            for j in 0..=i {
                let v = kernel.eval(xi, &features[j * d..(j + 1) * d]);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        GramMatrix { n, values }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// Where kernel rows come from.
pub(crate) enum RowSource<'a> {
    Compute { features: &'a [f64], d: usize, kernel: KernelSpec },
    /// `index[i]` maps solver row `i` into the shared matrix.
    Gram { gram: &'a GramMatrix, index: &'a [usize] },
}

impl RowSource<'_> {
    fn len(&self) -> usize {
        match self {
            RowSource::Compute { features, d, .. } => features.len() / d,
            RowSource::Gram { index, .. } => index.len(),
        }
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        match self {
            RowSource::Compute { features, d, kernel } => {
                kernel.eval(&features[i * d..(i + 1) * d], &features[j * d..(j + 1) * d])
            }
            RowSource::Gram { gram, index } => gram.get(index[i], index[j]),
        }
    }

    fn fill(&self, i: usize, out: &mut [f64]) {
        match self {
            RowSource::Compute { features, d, kernel } => {
                let xi = &features[i * d..(i + 1) * d];
                for (j, slot) in out.iter_mut().enumerate() {
                    *slot = kernel.eval(xi, &features[j * d..(j + 1) * d]);
                }
            }
            RowSource::Gram { gram, index } => {
                let base = index[i] * gram.n;
                for (slot, &j) in out.iter_mut().zip(index.iter()) {
                    *slot = gram.values[base + j];
                }
            }
        }
    }
}

/// Least-recently-used cache of full kernel rows, bounded by a byte budget.
pub(crate) struct KernelCache<'a> {
    source: RowSource<'a>,
    n: usize,
    diag: Vec<f64>,
    slot_of: Vec<Option<usize>>,
    owner: Vec<usize>,
    stamp: Vec<u64>,
    rows: Vec<Vec<f64>>,
    capacity: usize,
    clock: u64,
}

impl<'a> KernelCache<'a> {
    pub(crate) fn new(source: RowSource<'a>, budget_bytes: usize) -> KernelCache<'a> {
        let n = source.len();
        let row_bytes = (n * std::mem::size_of::<f64>()).max(1);
        let capacity = (budget_bytes / row_bytes).clamp(2, n.max(2));
        let diag = (0..n).map(|i| source.entry(i, i)).collect();
        KernelCache {
            source,
            n,
            diag,
            slot_of: vec![None; n],
            owner: Vec::new(),
            stamp: Vec::new(),
            rows: Vec::new(),
            capacity,
            clock: 0,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.n
    }

    pub(crate) fn diag(&self, i: usize) -> f64 {
        self.diag[i]
    }

    fn load(&mut self, i: usize, keep: Option<usize>) -> usize {
        self.clock += 1;
        if let Some(slot) = self.slot_of[i] {
            self.stamp[slot] = self.clock;
            return slot;
        }
        let slot = if self.rows.len() < self.capacity {
            self.rows.push(vec![0.0; self.n]);
            self.owner.push(i);
            self.stamp.push(0);
            self.rows.len() - 1
        } else {
            let victim = (0..self.rows.len())
                .filter(|&s| Some(s) != keep)
                .min_by_key(|&s| self.stamp[s])
                .expect("cache holds at least two rows");
            self.slot_of[self.owner[victim]] = None;
            self.owner[victim] = i;
            victim
        };
        self.source.fill(i, &mut self.rows[slot]);
        self.slot_of[i] = Some(slot);
        self.stamp[slot] = self.clock;
        slot
    }

    /// Rows `i` and `j` at once.
    pub(crate) fn pair(&mut self, i: usize, j: usize) -> (&[f64], &[f64]) {
        let si = self.load(i, None);
        let sj = self.load(j, Some(si));
        (&self.rows[si], &self.rows[sj])
    }

    pub(crate) fn row(&mut self, i: usize) -> &[f64] {
        let s = self.load(i, None);
        &self.rows[s]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rbf_from_lengthscale() {
        let k = KernelSpec::rbf_from_lengthscale(2.0).unwrap();
        assert_eq!(k, KernelSpec::Rbf { gamma: 0.125 });
        assert!(KernelSpec::rbf(0.0).is_err());
        let v = k.eval(&[0.0, 0.0], &[2.0, 0.0]);
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn cache_matches_direct_evaluation_under_eviction() {
        let features: Vec<f64> = (0..20).map(|v| (v as f64 * 0.37).sin()).collect();
        let kernel = KernelSpec::Rbf { gamma: 0.7 };
        // Budget for exactly two rows of ten entries.
        let mut cache = KernelCache::new(RowSource::Compute { features: &features, d: 2, kernel }, 160);
        assert_eq!(cache.capacity, 2);
        for &(i, j) in &[(0, 1), (2, 3), (1, 0), (9, 9), (4, 0)] {
            let (ri, rj) = cache.pair(i, j);
            let (ri, rj) = (ri.to_vec(), rj.to_vec());
            for k in 0..10 {
                let direct = |a: usize| kernel.eval(&features[2 * a..2 * a + 2], &features[2 * k..2 * k + 2]);
                assert_eq!(ri[k], direct(i));
                assert_eq!(rj[k], direct(j));
            }
        }
    }

    #[test]
    fn gram_source_respects_index_map() {
        let features = vec![0.0, 1.0, 2.0, 3.0];
        let gram = GramMatrix::compute(&features, 1, KernelSpec::Linear);
        let index = [3, 1];
        let mut cache = KernelCache::new(RowSource::Gram { gram: &gram, index: &index }, 1 << 20);
        assert_eq!(cache.len(), 2);
        assert_eq!(cache.row(0), &[9.0, 3.0]);
        assert_eq!(cache.diag(1), 1.0);
    }
}
