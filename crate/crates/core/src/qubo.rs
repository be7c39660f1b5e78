//! Binary least-squares subproblems as QUBOs.
//!
//! For one column `v` of `V` and a fixed nonnegative `W`,
//! `||v - W q||² = f(q) + ||v||²` with
//!
//! ```text
//! f(q) = Σ_j a_j q_j + Σ_{j<l} b_jl q_j q_l
//! a_j  = Σ_r W_rj (W_rj - 2 v_r)
//! b_jl = 2 Σ_r W_rj W_rl
//! ```
//!
//! The constant `||v||²` is kept as [`Qubo::offset`] so energies convert back
//! to residual norms, but it is never part of [`Qubo::evaluate_energy`].

use serde::{Deserialize, Serialize};

use crate::error::{NbmfError, Result};
use crate::matrix::DenseMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Qubo {
    k: usize,
    linear: Vec<f64>,
    /// k×k row-major; only entries with row < col are ever read or written.
    quadratic: Vec<f64>,
    offset: f64,
}

impl Qubo {
    pub fn zeros(k: usize) -> Self {
        Qubo {
            k,
            linear: vec![0.0; k],
            quadratic: vec![0.0; k * k],
            offset: 0.0,
        }
    }

    /// Builds from linear terms and `(j, l, b_jl)` triples with `j < l`.
    pub fn from_terms(linear: Vec<f64>, couplings: &[(usize, usize, f64)], offset: f64) -> Result<Self> {
        let mut q = Qubo::zeros(linear.len());
        q.linear = linear;
        q.offset = offset;
        for &(j, l, b) in couplings {
            q.set_coupling(j, l, b)?;
        }
        Ok(q)
    }

    pub fn num_variables(&self) -> usize {
        self.k
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn set_linear(&mut self, j: usize, a: f64) -> Result<()> {
        self.check_index(j)?;
        self.linear[j] = a;
        Ok(())
    }

    /// Sets `b_jl`; requires `j < l < k`.
    pub fn set_coupling(&mut self, j: usize, l: usize, b: f64) -> Result<()> {
        self.check_index(l)?;
        if j >= l {
            return Err(NbmfError::Domain(format!(
                "coupling ({j}, {l}) must satisfy j < l"
            )));
        }
        self.quadratic[j * self.k + l] = b;
        Ok(())
    }

    /// `b_jl` for any ordered pair of distinct indices.
    #[inline]
    pub fn coupling(&self, j: usize, l: usize) -> f64 {
        debug_assert_ne!(j, l);
        let (lo, hi) = if j < l { (j, l) } else { (l, j) };
        self.quadratic[lo * self.k + hi]
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.k {
            return Err(NbmfError::Domain(format!(
                "variable index {j} out of range for {} variables",
                self.k
            )));
        }
        Ok(())
    }

    fn check_len(&self, q: &[u8]) -> Result<()> {
        if q.len() != self.k {
            return Err(NbmfError::dim(format!(
                "bit vector has length {}, QUBO has {} variables",
                q.len(),
                self.k
            )));
        }
        Ok(())
    }

    /// `f(q)`, offset excluded.
    pub fn evaluate_energy(&self, q: &[u8]) -> Result<f64> {
        self.check_len(q)?;
        Ok(self.energy_unchecked(q))
    }

    pub(crate) fn energy_unchecked(&self, q: &[u8]) -> f64 {
        let mut e = 0.0;
        for j in 0..self.k {
            if q[j] == 0 {
                continue;
            }
            e += self.linear[j];
            let row = &self.quadratic[j * self.k..(j + 1) * self.k];
            for l in j + 1..self.k {
                if q[l] == 1 {
                    e += row[l];
                }
            }
        }
        e
    }

    /// `f(q with bit j flipped) - f(q)` in O(k).
    pub fn energy_delta(&self, q: &[u8], j: usize) -> Result<f64> {
        self.check_len(q)?;
        self.check_index(j)?;
        let mut field = self.linear[j];
        for l in 0..self.k {
            if l != j && q[l] == 1 {
                field += self.coupling(j, l);
            }
        }
        Ok(if q[j] == 1 { -field } else { field })
    }

    /// Symmetric k×k coupling matrix with zero diagonal, for samplers that
    /// update local fields incrementally.
    pub(crate) fn symmetric_couplings(&self) -> Vec<f64> {
        let k = self.k;
        let mut s = vec![0.0; k * k];
        for j in 0..k {
            for l in j + 1..k {
                let b = self.quadratic[j * k + l];
                s[j * k + l] = b;
                s[l * k + j] = b;
            }
        }
        s
    }

    /// Stable 64-bit FNV-1a fingerprint of the coefficients.
    pub fn digest(&self) -> u64 {
        const PRIME: u64 = 0x0000_0100_0000_01B3;
        let mut h: u64 = 0xCBF2_9CE4_8422_2325;
        let mut eat = |x: u64| {
            for byte in x.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        eat(self.k as u64);
        self.linear.iter().for_each(|a| eat(a.to_bits()));
        for j in 0..self.k {
            for l in j + 1..self.k {
                eat(self.quadratic[j * self.k + l].to_bits());
            }
        }
        eat(self.offset.to_bits());
        h
    }
}

/// Builds column QUBOs for a fixed `W`, sharing the Gram matrix `WᵀW`
/// across columns.
#[derive(Clone, Debug)]
pub struct ColumnQuboBuilder<'a> {
    w: &'a DenseMatrix,
    gram: Vec<f64>,
}

impl<'a> ColumnQuboBuilder<'a> {
    pub fn new(w: &'a DenseMatrix) -> Self {
        let (n, k) = (w.rows(), w.cols());
        let mut gram = vec![0.0; k * k];
        for r in 0..n {
            let row = w.row(r);
            for j in 0..k {
                let wj = row[j];
                if wj == 0.0 {
                    continue;
                }
                for l in j..k {
                    gram[j * k + l] += wj * row[l];
                }
            }
        }
        ColumnQuboBuilder { w, gram }
    }

    pub fn build(&self, v: &[f64]) -> Result<Qubo> {
        let (n, k) = (self.w.rows(), self.w.cols());
        if v.len() != n {
            return Err(NbmfError::dim(format!(
                "column has length {}, W has {n} rows",
                v.len()
            )));
        }
        let mut wt_v = vec![0.0; k];
        for (r, &vr) in v.iter().enumerate() {
            if vr == 0.0 {
                continue;
            }
            for (acc, &wj) in wt_v.iter_mut().zip(self.w.row(r)) {
                *acc += wj * vr;
            }
        }
        let mut q = Qubo::zeros(k);
        for j in 0..k {
            q.linear[j] = self.gram[j * k + j] - 2.0 * wt_v[j];
            for l in j + 1..k {
                q.quadratic[j * k + l] = 2.0 * self.gram[j * k + l];
            }
        }
        q.offset = v.iter().map(|x| x * x).sum();
        Ok(q)
    }
}

/// QUBO whose energy plus offset equals `||v - W q||²`.
pub fn build_column_qubo(w: &DenseMatrix, v: &[f64]) -> Result<Qubo> {
    ColumnQuboBuilder::new(w).build(v)
}

/// Capacity of a defect-free Chimera `C_c` graph (a c×c grid of K_{4,4}
/// cells) for problems whose coupling graph is complete.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueCapacity {
    /// Largest complete graph that is a minor of `C_c`: `4c + 1`.
    pub max_variables: usize,
    /// Qubits per variable in the triangle embedding of `K_{4c}`: `c + 1`.
    /// Hosting the one extra variable beyond `4c` needs longer chains.
    pub chain_length: usize,
}

pub fn chimera_clique_capacity(grid_size: usize) -> Result<CliqueCapacity> {
    if grid_size == 0 {
        return Err(NbmfError::Domain("Chimera grid size must be at least 1".into()));
    }
    Ok(CliqueCapacity {
        max_variables: 4 * grid_size + 1,
        chain_length: grid_size + 1,
    })
}
