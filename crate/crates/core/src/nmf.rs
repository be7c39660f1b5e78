//! Multiplicative-update NMF (Frobenius objective), the real-valued baseline
//! that NBMF is compared against.

use crate::error::{NbmfError, Result};
use crate::matrix::{frobenius_residual, DenseMatrix};
use crate::rng::SeedStream;

#[derive(Clone, Debug)]
pub struct NmfResult {
    pub w: DenseMatrix,
    pub h: DenseMatrix,
    /// `||V - WH||_F` after each iteration.
    pub objective_history: Vec<f64>,
}

/// `x ← x · num / den`; entries with `den = 0` keep their value (the
/// numerator is then zero as well for nonnegative data).
fn scale_in_place(x: &mut DenseMatrix, num: &DenseMatrix, den: &DenseMatrix) {
    for r in 0..x.rows() {
        for c in 0..x.cols() {
            let d = den.get(r, c);
            if d > 0.0 {
                x.set(r, c, x.get(r, c) * num.get(r, c) / d);
            }
        }
    }
}

pub fn nmf_baseline(v: &DenseMatrix, k: usize, iters: usize, rng: &mut SeedStream) -> Result<NmfResult> {
    v.validate_nonnegative("V")?;
    if k == 0 {
        return Err(NbmfError::Validation("k must be at least 1".into()));
    }
    let (n, m) = v.shape();
    let mean = if n * m > 0 {
        v.as_slice().iter().sum::<f64>() / (n * m) as f64
    } else {
        0.0
    };
    let scale = (mean / k as f64).sqrt().max(1e-3);
    let mut w = DenseMatrix::from_vec(n, k, (0..n * k).map(|_| scale * (0.1 + rng.next_f64())).collect())?;
    let mut h = DenseMatrix::from_vec(k, m, (0..k * m).map(|_| scale * (0.1 + rng.next_f64())).collect())?;
    let mut history = Vec::with_capacity(iters);
    for _ in 0..iters {
        // H ← H ⊙ (WᵀV) / (WᵀW H)
        let wt = w.transpose();
        let num = wt.matmul(v)?;
        let den = wt.matmul(&w)?.matmul(&h)?;
        scale_in_place(&mut h, &num, &den);
        // W ← W ⊙ (V Hᵀ) / (W H Hᵀ)
        let ht = h.transpose();
        let num = v.matmul(&ht)?;
        let den = w.matmul(&h.matmul(&ht)?)?;
        scale_in_place(&mut w, &num, &den);
        history.push(frobenius_residual(v, &w, &h)?);
    }
    Ok(NmfResult {
        w,
        h,
        objective_history: history,
    })
}
