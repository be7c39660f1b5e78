//! Nonnegative/binary matrix factorization (`V ≈ W H`, `W ≥ 0`, `H ∈ {0,1}`)
//! by alternating least squares, with the binary half-step cast as one small
//! QUBO per data column, plus a cumulative time-to-targets benchmark for
//! comparing QUBO samplers.

pub mod als;
pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod nmf;
pub mod nnls;
pub mod par;
pub mod qubo;
pub mod rng;
pub mod samplers;
pub mod synth;

pub use als::{nbmf, nbmf_observed, update_h, ColumnSolveLog, FactorizationResult, NbmfRun, StopReason};
pub use config::FactorizationConfig;
pub use error::{NbmfError, Result};
pub use matrix::{frobenius_residual, BinaryMatrix, DenseMatrix, MatrixView};
pub use nnls::{projected_gradient_norm, update_w, NnlsConfig};
pub use qubo::{build_column_qubo, chimera_clique_capacity, CliqueCapacity, Qubo};
pub use rng::SeedStream;
pub use samplers::{
    best_of, solve_exhaustive, solve_sa, solve_tabu, Sample, SampleSet, Sampler, SamplerBudget, SamplerKind,
};
