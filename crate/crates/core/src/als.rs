//! Alternating least squares for `V ≈ W H` with `W ≥ 0` and binary `H`.
//!
//! Each outer iteration solves the ridge NNLS problem for `W`, then solves
//! one k-variable QUBO per column of `V` for `H`. Column `i` of `H` only
//! affects column `i` of `W H`, so the columns are independent.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::config::FactorizationConfig;
use crate::error::{NbmfError, Result};
use crate::matrix::{frobenius_residual, BinaryMatrix, DenseMatrix};
use crate::nnls::update_w;
use crate::par;
use crate::qubo::{ColumnQuboBuilder, Qubo};
use crate::rng::SeedStream;
use crate::samplers::Sampler;

/// One solved column QUBO; its target is what benchmark challengers must match.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSolveLog {
    pub outer_iter: usize,
    pub column_index: usize,
    pub qubo_digest: u64,
    /// Seed of the stream the sampler drew from for this column.
    pub seed: u64,
    pub bits: Vec<u8>,
    /// Best sampler energy, offset excluded.
    pub target_energy: f64,
    /// `||v_i||²`; `target_energy + offset` is the squared column residual.
    pub offset: f64,
    pub samples_used: usize,
    pub wall_time: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    RelativeChange,
    FixedPoint,
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationResult {
    pub w: DenseMatrix,
    pub h: BinaryMatrix,
    /// `||V - WH||_F` after each outer iteration.
    pub objective_history: Vec<f64>,
    pub outer_iters: usize,
    pub qubo_solves: usize,
    pub stop_reason: StopReason,
}

#[derive(Clone, Debug)]
pub struct NbmfRun {
    pub result: FactorizationResult,
    pub logs: Vec<ColumnSolveLog>,
}

/// Runs the factorization and keeps every column log.
pub fn nbmf(v: &DenseMatrix, cfg: &FactorizationConfig) -> Result<NbmfRun> {
    let mut logs = Vec::new();
    let result = nbmf_observed(v, cfg, &mut |log, _| logs.push(log.clone()))?;
    Ok(NbmfRun { result, logs })
}

/// Runs the factorization, handing each column log and its QUBO to
/// `observer` in (iteration, column) order as soon as an `H` step completes.
pub fn nbmf_observed(
    v: &DenseMatrix,
    cfg: &FactorizationConfig,
    observer: &mut dyn FnMut(&ColumnSolveLog, &Qubo),
) -> Result<FactorizationResult> {
    cfg.validate()?;
    v.validate_nonnegative("V")?;
    let (_, m) = v.shape();
    let k = cfg.k;
    let root = SeedStream::new(cfg.seed);

    let mut init = root.fork(0);
    let bits: Vec<u8> = (0..k * m).map(|_| init.coin() as u8).collect();
    let mut h = BinaryMatrix::from_vec(k, m, bits)?;

    let nnls = cfg.nnls();
    let mut w: Option<DenseMatrix> = None;
    let mut history = Vec::new();
    let mut qubo_solves = 0;
    let mut stop_reason = StopReason::MaxIterations;

    for iter in 0..cfg.max_outer_iters {
        let new_w = update_w(v, &h, &nnls, w.as_ref())?;
        let solved = solve_columns(v, &new_w, &cfg.sampler, &root.fork(1 + iter as u64), iter)?;
        let mut new_h = BinaryMatrix::zeros(k, m);
        for (log, qubo) in &solved {
            new_h.set_column(log.column_index, &log.bits);
            observer(log, qubo);
        }
        qubo_solves += solved.len();

        let residual = frobenius_residual(v, &new_w, &new_h)?;
        let unchanged = new_h == h;
        let previous = history.last().copied();
        history.push(residual);
        w = Some(new_w);
        h = new_h;

        if unchanged {
            stop_reason = StopReason::FixedPoint;
            break;
        }
        if let Some(prev) = previous {
            let change = if prev > 0.0 { (prev - residual).abs() / prev } else { 0.0 };
            if change < cfg.rel_tol {
                stop_reason = StopReason::RelativeChange;
                break;
            }
        }
    }

    Ok(FactorizationResult {
        w: w.expect("at least one outer iteration"),
        h,
        outer_iters: history.len(),
        objective_history: history,
        qubo_solves,
        stop_reason,
    })
}

/// The `H` half-step: one QUBO per column, each solved by `sampler` with
/// column `i` drawing from `rng.fork(i)`.
pub fn update_h(
    v: &DenseMatrix,
    w: &DenseMatrix,
    sampler: &Sampler,
    rng: &SeedStream,
) -> Result<(BinaryMatrix, Vec<ColumnSolveLog>)> {
    let solved = solve_columns(v, w, sampler, rng, 0)?;
    let mut h = BinaryMatrix::zeros(w.cols(), v.cols());
    let logs = solved
        .into_iter()
        .map(|(log, _)| {
            h.set_column(log.column_index, &log.bits);
            log
        })
        .collect();
    Ok((h, logs))
}

fn solve_columns(
    v: &DenseMatrix,
    w: &DenseMatrix,
    sampler: &Sampler,
    rng: &SeedStream,
    outer_iter: usize,
) -> Result<Vec<(ColumnSolveLog, Qubo)>> {
    if w.rows() != v.rows() {
        return Err(NbmfError::dim(format!(
            "W has {} rows but V has {}",
            w.rows(),
            v.rows()
        )));
    }
    let builder = ColumnQuboBuilder::new(w);
    par::try_map_indexed(v.cols(), |i| {
        let started = Instant::now();
        let qubo = builder.build(&v.column(i))?;
        let stream = rng.fork(i as u64);
        let set = sampler.sample(&qubo, &stream)?;
        let best = set.best()?;
        let log = ColumnSolveLog {
            outer_iter,
            column_index: i,
            qubo_digest: qubo.digest(),
            seed: stream.seed(),
            bits: best.bits.clone(),
            target_energy: best.energy,
            offset: qubo.offset(),
            samples_used: set.len(),
            wall_time: started.elapsed(),
        };
        Ok((log, qubo))
    })
}
