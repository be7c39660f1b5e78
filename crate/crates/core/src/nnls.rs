//! The `W` half-step: ridge-regularised nonnegative least squares.
//!
//! `min_{W ≥ 0} ½||V - W H||_F² + ½α||W||_F²` separates into one
//! k-variable problem per row of `V`:
//!
//! ```text
//! min_{w ≥ 0} ½ wᵀ G w - cᵀ w,   G = H Hᵀ + α I,   c = H vᵀ
//! ```
//!
//! Each row is solved by projected gradient descent with an Armijo
//! backtracking search along the projection arc.

use serde::{Deserialize, Serialize};

use crate::error::{NbmfError, Result};
use crate::matrix::{DenseMatrix, MatrixView};
use crate::par;

const SUFFICIENT_DECREASE: f64 = 1e-4;
const STEP_SHRINK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NnlsConfig {
    pub alpha: f64,
    pub max_inner_iters: usize,
    pub grad_tol: f64,
}

impl Default for NnlsConfig {
    fn default() -> Self {
        NnlsConfig {
            alpha: 0.01,
            max_inner_iters: 2000,
            grad_tol: 1e-10,
        }
    }
}

impl NnlsConfig {
    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(NbmfError::Validation(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.grad_tol > 0.0) {
            return Err(NbmfError::Validation(format!(
                "grad_tol must be > 0, got {}",
                self.grad_tol
            )));
        }
        Ok(())
    }
}

/// Quadratic model shared by every row: `G = H Hᵀ + α I`, plus which
/// features have at least one nonzero in `H`.
#[derive(Clone, Debug)]
pub(crate) struct RowProblem {
    k: usize,
    gram: Vec<f64>,
    active: Vec<bool>,
}

impl RowProblem {
    pub(crate) fn new<H: MatrixView>(h: &H, alpha: f64) -> Self {
        let (k, m) = h.shape();
        let mut gram = vec![0.0; k * k];
        let mut active = vec![false; k];
        for j in 0..k {
            for c in 0..m {
                let x = h.value(j, c);
                if x != 0.0 {
                    active[j] = true;
                    for l in j..k {
                        gram[j * k + l] += x * h.value(l, c);
                    }
                }
            }
            gram[j * k + j] += alpha;
            for l in 0..j {
                gram[j * k + l] = gram[l * k + j];
            }
        }
        RowProblem { k, gram, active }
    }

    fn linear_term<H: MatrixView>(&self, h: &H, v_row: &[f64]) -> Vec<f64> {
        (0..self.k)
            .map(|j| v_row.iter().enumerate().map(|(c, &x)| x * h.value(j, c)).sum())
            .collect()
    }

    fn gradient(&self, lin: &[f64], w: &[f64]) -> Vec<f64> {
        let k = self.k;
        (0..k)
            .map(|j| {
                if !self.active[j] {
                    return 0.0;
                }
                let row = &self.gram[j * k..(j + 1) * k];
                row.iter().zip(w).map(|(g, x)| g * x).sum::<f64>() - lin[j]
            })
            .collect()
    }

    /// `½ dᵀ G d`
    fn curvature(&self, d: &[f64]) -> f64 {
        let k = self.k;
        let mut acc = 0.0;
        for j in 0..k {
            if d[j] == 0.0 {
                continue;
            }
            let row = &self.gram[j * k..(j + 1) * k];
            acc += d[j] * row.iter().zip(d).map(|(g, x)| g * x).sum::<f64>();
        }
        0.5 * acc
    }

    fn solve(&self, lin: &[f64], mut w: Vec<f64>, cfg: &NnlsConfig) -> Vec<f64> {
        let k = self.k;
        for j in 0..k {
            if !self.active[j] || !(w[j] > 0.0) {
                w[j] = 0.0;
            }
        }
        let mut grad = self.gradient(lin, &w);
        let tol = cfg.grad_tol * (1.0 + projected_norm(&w, &grad));
        let mut trial = vec![0.0; k];
        let mut dir = vec![0.0; k];
        for _ in 0..cfg.max_inner_iters {
            if projected_norm(&w, &grad) <= tol {
                break;
            }
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..MAX_BACKTRACKS {
                for j in 0..k {
                    trial[j] = if self.active[j] {
                        (w[j] - step * grad[j]).max(0.0)
                    } else {
                        0.0
                    };
                    dir[j] = trial[j] - w[j];
                }
                let linear: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
                let change = linear + self.curvature(&dir);
                if change <= SUFFICIENT_DECREASE * linear && linear < 0.0 {
                    accepted = true;
                    break;
                }
                step *= STEP_SHRINK;
            }
            if !accepted {
                break;
            }
            std::mem::swap(&mut w, &mut trial);
            grad = self.gradient(lin, &w);
        }
        w
    }
}

fn projected_norm(w: &[f64], grad: &[f64]) -> f64 {
    w.iter()
        .zip(grad)
        .map(|(&x, &g)| if x > 0.0 || g < 0.0 { g * g } else { 0.0 })
        .sum::<f64>()
        .sqrt()
}

/// Norm of the gradient of `½||v_row - w H||² + ½α||w||²` at `w_row`, with
/// components dropped where `w = 0` and the gradient points outward.
pub fn projected_gradient_norm<H: MatrixView>(v_row: &[f64], h: &H, w_row: &[f64], alpha: f64) -> Result<f64> {
    let (k, m) = h.shape();
    if v_row.len() != m || w_row.len() != k {
        return Err(NbmfError::dim(format!(
            "row of length {} and weights of length {} do not match a {k}x{m} H",
            v_row.len(),
            w_row.len()
        )));
    }
    let mut grad = vec![0.0; k];
    for c in 0..m {
        let pred: f64 = (0..k).map(|j| w_row[j] * h.value(j, c)).sum();
        let r = pred - v_row[c];
        for (j, g) in grad.iter_mut().enumerate() {
            *g += r * h.value(j, c);
        }
    }
    for (g, &x) in grad.iter_mut().zip(w_row) {
        *g += alpha * x;
    }
    Ok(projected_norm(w_row, &grad))
}

/// Solves for `W ≥ 0` given `V` and `H`, warm-starting from `init` when given.
///
/// Features whose row of `H` is entirely zero get a zero column in `W`.
pub fn update_w<H: MatrixView + Sync>(
    v: &DenseMatrix,
    h: &H,
    cfg: &NnlsConfig,
    init: Option<&DenseMatrix>,
) -> Result<DenseMatrix> {
    cfg.validate()?;
    let (n, m) = v.shape();
    let k = h.rows();
    if h.cols() != m {
        return Err(NbmfError::dim(format!(
            "H has {} columns but V has {m}",
            h.cols()
        )));
    }
    if let Some(w0) = init {
        if w0.shape() != (n, k) {
            return Err(NbmfError::dim(format!(
                "initial W is {}x{}, expected {n}x{k}",
                w0.rows(),
                w0.cols()
            )));
        }
    }
    let problem = RowProblem::new(h, cfg.alpha);
    let rows = par::map_indexed(n, |r| {
        let lin = problem.linear_term(h, v.row(r));
        let start = init.map_or_else(|| vec![0.0; k], |w0| w0.row(r).to_vec());
        problem.solve(&lin, start, cfg)
    });
    DenseMatrix::from_vec(n, k, rows.into_iter().flatten().collect())
}
