use serde::{Deserialize, Serialize};

use crate::error::{NbmfError, Result};
use crate::nnls::NnlsConfig;
use crate::samplers::Sampler;

/// Inputs to [`crate::als::nbmf`] besides the data matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationConfig {
    /// Number of features (rows of H).
    pub k: usize,
    /// Ridge weight on `W`.
    pub alpha: f64,
    pub max_outer_iters: usize,
    /// Stop once the relative change of `||V - WH||_F` drops below this.
    pub rel_tol: f64,
    pub seed: u64,
    /// Solver for every column QUBO of the `H` half-step.
    pub sampler: Sampler,
    pub nnls_max_iters: usize,
    pub nnls_grad_tol: f64,
}

impl FactorizationConfig {
    pub fn new(k: usize, sampler: Sampler) -> Self {
        let nnls = NnlsConfig::default();
        FactorizationConfig {
            k,
            alpha: nnls.alpha,
            max_outer_iters: 50,
            rel_tol: 1e-4,
            seed: 0,
            sampler,
            nnls_max_iters: nnls.max_inner_iters,
            nnls_grad_tol: nnls.grad_tol,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn nnls(&self) -> NnlsConfig {
        NnlsConfig {
            alpha: self.alpha,
            max_inner_iters: self.nnls_max_iters,
            grad_tol: self.nnls_grad_tol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(NbmfError::Validation("k must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(NbmfError::Validation(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if self.max_outer_iters == 0 {
            return Err(NbmfError::Validation("max_outer_iters must be at least 1".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(NbmfError::Validation(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if self.k > self.sampler.max_variables() {
            return Err(NbmfError::Capacity {
                requested: self.k,
                limit: self.sampler.max_variables(),
            });
        }
        Ok(())
    }
}
