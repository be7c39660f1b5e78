#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::Path;
use std::process::{Command, Output};

use nbmf::synth::synthetic_faces;
use nbmf::{nbmf_observed, DenseMatrix, FactorizationConfig, Qubo, Sampler};

/// Chimera node `(row, col, side, k)`; side 0 is vertical, side 1 horizontal.
pub fn chimera_index(c: usize, i: usize, j: usize, u: usize, k: usize) -> usize {
    ((i * c + j) * 2 + u) * 4 + k
}

pub fn chimera_adjacency(c: usize) -> Vec<Vec<bool>> {
    let n = 8 * c * c;
    let mut adj = vec![vec![false; n]; n];
    let mut link = |a: usize, b: usize| {
        adj[a][b] = true;
        adj[b][a] = true;
    };
    for i in 0..c {
        for j in 0..c {
            for k in 0..4 {
                for l in 0..4 {
                    link(chimera_index(c, i, j, 0, k), chimera_index(c, i, j, 1, l));
                }
                if i + 1 < c {
                    link(chimera_index(c, i, j, 0, k), chimera_index(c, i + 1, j, 0, k));
                }
                if j + 1 < c {
                    link(chimera_index(c, i, j, 1, k), chimera_index(c, i, j + 1, 1, k));
                }
            }
        }
    }
    adj
}

/// `K_{4c}` with every chain of length `c + 1`.
pub fn triangle_embedding(c: usize) -> Vec<Vec<usize>> {
    let mut chains = Vec::new();
    for a in 0..c {
        for k in 0..4 {
            let mut chain: Vec<usize> = (0..=a).map(|j| chimera_index(c, a, j, 1, k)).collect();
            chain.extend((a..c).map(|i| chimera_index(c, i, a, 0, k)));
            chains.push(chain);
        }
    }
    chains
}

/// `K_{4c+1}`: the last diagonal cell gives one qubit line to a new chain.
pub fn clique_embedding(c: usize) -> Vec<Vec<usize>> {
    let last = c - 1;
    let mut chains = Vec::new();
    for a in 0..last {
        for k in 0..4 {
            let mut chain: Vec<usize> = (0..c).map(|j| chimera_index(c, a, j, 1, k)).collect();
            chain.extend((a..c).map(|i| chimera_index(c, i, a, 0, k)));
            chains.push(chain);
        }
    }
    for k in 0..3 {
        let mut chain: Vec<usize> = (0..c).map(|j| chimera_index(c, last, j, 1, k)).collect();
        chain.push(chimera_index(c, last, last, 0, k));
        chains.push(chain);
    }
    chains.push((0..c).map(|j| chimera_index(c, last, j, 1, 3)).collect());
    chains.push((0..c).map(|i| chimera_index(c, i, last, 0, 3)).collect());
    chains
}

fn connected(adj: &[Vec<bool>], chain: &[usize]) -> bool {
    let mut seen = vec![false; chain.len()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(x) = queue.pop_front() {
        for (y, s) in seen.iter_mut().enumerate() {
            if !*s && adj[chain[x]][chain[y]] {
                *s = true;
                queue.push_back(y);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Disjoint, connected, nonempty chains with an edge between every pair.
pub fn is_clique_embedding(adj: &[Vec<bool>], chains: &[Vec<usize>]) -> bool {
    let mut owner = vec![usize::MAX; adj.len()];
    for (ci, chain) in chains.iter().enumerate() {
        if chain.is_empty() || !connected(adj, chain) {
            return false;
        }
        for &q in chain {
            if owner[q] != usize::MAX {
                return false;
            }
            owner[q] = ci;
        }
    }
    for a in 0..chains.len() {
        for b in a + 1..chains.len() {
            let touch = chains[a].iter().any(|&x| chains[b].iter().any(|&y| adj[x][y]));
            if !touch {
                return false;
            }
        }
    }
    true
}

/// Exhaustive search over every assignment of the 8 qubits of one cell to
/// `size` chains or to no chain.
pub fn clique_minor_exists_in_one_cell(size: usize) -> bool {
    let adj = chimera_adjacency(1);
    let base = size + 1;
    let total = base.pow(8);
    for code in 0..total {
        let mut chains = vec![Vec::new(); size];
        let mut x = code;
        for q in 0..8 {
            let label = x % base;
            x /= base;
            if label < size {
                chains[label].push(q);
            }
        }
        if chains.iter().any(|c| c.is_empty()) {
            continue;
        }
        if is_clique_embedding(&adj, &chains) {
            return true;
        }
    }
    false
}

/// `Σ_r (v_r - Σ_j W_rj q_j)²` computed entry by entry.
pub fn naive_residual_sq(w: &DenseMatrix, v: &[f64], q: &[u8]) -> f64 {
    let (n, k) = w.shape();
    let mut total = 0.0;
    for r in 0..n {
        let mut x = 0.0;
        for j in 0..k {
            if q[j] == 1 {
                x += w.get(r, j);
            }
        }
        total += (v[r] - x) * (v[r] - x);
    }
    total
}

/// Column QUBOs met while factorizing a synthetic face corpus with `k`
/// features, in (iteration, column) order.
pub fn nbmf_qubos(count: usize, k: usize, seed: u64) -> Vec<Qubo> {
    let images = count.max(k);
    let ds = synthetic_faces(images, 19, 19, seed).unwrap();
    let mut cfg = FactorizationConfig::new(k, Sampler::annealing(10, 50)).with_seed(seed);
    cfg.max_outer_iters = 50;
    cfg.rel_tol = 1e-12;
    let mut out = Vec::new();
    nbmf_observed(&ds.matrix, &cfg, &mut |_, q| {
        if out.len() < count {
            out.push(q.clone());
        }
    })
    .unwrap();
    assert_eq!(out.len(), count, "factorization stopped before {count} QUBOs");
    out
}

pub fn cli(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nbmf"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("nbmf binary runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Drops the given keys from every JSON object line (comment lines kept).
pub fn strip_json_lines(text: &str, keys: &[&str]) -> String {
    text.lines()
        .map(|line| {
            if line.starts_with('#') || line.trim().is_empty() {
                return line.to_string();
            }
            let mut value: serde_json::Value = serde_json::from_str(line).expect("json line");
            if let Some(obj) = value.as_object_mut() {
                for k in keys {
                    obj.remove(*k);
                }
            }
            value.to_string()
        })
        .collect::<Vec<_>>()
        .join("\n")
}
