use super::kernel::KernelSpec;
use super::mlp::MlpScorer;

/// `h(x) = w·x + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearScorer {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearScorer {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// `h(x) = Σ_i c_i k(s_i, x) + b` over support vectors `s_i`, where
/// `c_i = α_i z_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelScorer {
    pub(crate) d: usize,
    pub(crate) support_vectors: Vec<f64>,
    pub(crate) dual_coefs: Vec<f64>,
    pub(crate) bias: f64,
    pub(crate) kernel: KernelSpec,
}

impl KernelScorer {
    pub fn new(d: usize, support_vectors: Vec<f64>, dual_coefs: Vec<f64>, bias: f64, kernel: KernelSpec) -> Self {
        assert_eq!(support_vectors.len(), dual_coefs.len() * d, "one support vector per coefficient");
        Self { d, support_vectors, dual_coefs, bias, kernel }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .chunks_exact(self.d)
            .zip(&self.dual_coefs)
            .map(|(sv, c)| c * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn num_support_vectors(&self) -> usize {
        self.dual_coefs.len()
    }

    pub fn support_vector(&self, i: usize) -> &[f64] {
        &self.support_vectors[i * self.d..(i + 1) * self.d]
    }

    pub fn dual_coefs(&self) -> &[f64] {
        &self.dual_coefs
    }

    /// Primal weights of a linear-kernel model; `None` for other kernels.
    pub fn to_linear(&self) -> Option<LinearScorer> {
        if self.kernel != KernelSpec::Linear {
            return None;
        }
        let mut weights = vec![0.0; self.d];
        for (sv, c) in self.support_vectors.chunks_exact(self.d).zip(&self.dual_coefs) {
            for (w, v) in weights.iter_mut().zip(sv) {
                *w += c * v;
            }
        }
        Some(LinearScorer { weights, bias: self.bias })
    }
}

/// Any real-valued score function.
#[derive(Clone, Debug, PartialEq)]
pub enum Scorer {
    Linear(LinearScorer),
    Kernel(KernelScorer),
    Mlp(MlpScorer),
}

impl Scorer {
    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            Scorer::Linear(s) => s.score(x),
            Scorer::Kernel(s) => s.score(x),
            Scorer::Mlp(s) => s.output(x),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Scorer::Linear(s) => s.dim(),
            Scorer::Kernel(s) => s.dim(),
            Scorer::Mlp(s) => s.input_dim(),
        }
    }
}
