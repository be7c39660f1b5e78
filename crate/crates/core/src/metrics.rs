//! Comparison statistics between factorizations.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matrix::{frobenius_residual, DenseMatrix, MatrixView};

/// Fraction of entries with `|x| ≤ zero_tol`. Empty matrices count as fully sparse.
pub fn sparsity<M: MatrixView>(m: &M, zero_tol: f64) -> f64 {
    let (rows, cols) = m.shape();
    let total = rows * cols;
    if total == 0 {
        return 1.0;
    }
    let mut zeros = 0usize;
    for r in 0..rows {
        for c in 0..cols {
            if m.value(r, c).abs() <= zero_tol {
                zeros += 1;
            }
        }
    }
    zeros as f64 / total as f64
}

/// Zero threshold for real-valued factors: `1e-6 · max|M|`.
pub fn default_zero_tol(m: &DenseMatrix) -> f64 {
    1e-6 * m.as_slice().iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// `a / b`, with `0/0 = 1` and `x/0 = ∞` for `x > 0`.
pub fn ratio_of_residuals(a: f64, b: f64) -> f64 {
    match (a == 0.0, b == 0.0) {
        (true, true) => 1.0,
        (false, true) => f64::INFINITY,
        _ => a / b,
    }
}

/// `||V - W_a H_a||_F / ||V - W_b H_b||_F`.
pub fn error_ratio<Ha: MatrixView, Hb: MatrixView>(
    v: &DenseMatrix,
    w_a: &DenseMatrix,
    h_a: &Ha,
    w_b: &DenseMatrix,
    h_b: &Hb,
) -> Result<f64> {
    let a = frobenius_residual(v, w_a, h_a)?;
    let b = frobenius_residual(v, w_b, h_b)?;
    Ok(ratio_of_residuals(a, b))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorageReport {
    pub h_entries: u64,
    pub binary_h_bits: u64,
    pub real_h_bits: u64,
    pub w_bits: u64,
    /// `real_h_bits / binary_h_bits`, i.e. `float_bits`.
    pub h_ratio: f64,
}

/// Bits needed for `H` at one bit per entry versus `float_bits` per entry,
/// plus `W` at `float_bits` per entry.
pub fn storage_report<W: MatrixView, H: MatrixView>(w: &W, h: &H, float_bits: u32) -> StorageReport {
    let h_entries = (h.rows() * h.cols()) as u64;
    let w_entries = (w.rows() * w.cols()) as u64;
    StorageReport {
        h_entries,
        binary_h_bits: h_entries,
        real_h_bits: h_entries * float_bits as u64,
        w_bits: w_entries * float_bits as u64,
        h_ratio: float_bits as f64,
    }
}
