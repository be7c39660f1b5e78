//! QUBO samplers behind one interface.
//!
//! * [`SamplerKind::Annealing`] — single-flip Metropolis simulated annealing,
//!   the software stand-in for annealing hardware. One read = one anneal.
//! * [`SamplerKind::Tabu`] — steepest-descent tabu search with restarts.
//! * [`SamplerKind::Exhaustive`] — Gray-code enumeration; the ground-truth
//!   oracle for `k ≤ 24`.
//!
//! Read `r` always draws from `rng.fork(r)`, so the first `N` reads of a
//! larger budget are exactly the `N`-read sample set, and reads can run in
//! parallel without changing results.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{NbmfError, Result};
use crate::par;
use crate::qubo::Qubo;
use crate::rng::SeedStream;

/// Enumeration guard for [`solve_exhaustive`].
pub const EXHAUSTIVE_MAX_VARIABLES: usize = 24;

/// Energies this close to a target count as reaching it.
pub const TARGET_SLACK: f64 = 1e-9;

const UPHILL_ACCEPTANCE: f64 = 0.8;
const COLD_FRACTION: f64 = 0.01;
const PROBE_STATES: usize = 16;
const PROBE_TAG: u64 = u64::MAX - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Exhaustive,
    #[serde(rename = "sa")]
    Annealing,
    Tabu,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Exhaustive => "exhaustive",
            SamplerKind::Annealing => "sa",
            SamplerKind::Tabu => "tabu",
        }
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = NbmfError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exhaustive" => Ok(SamplerKind::Exhaustive),
            "sa" | "anneal" | "annealing" => Ok(SamplerKind::Annealing),
            "tabu" => Ok(SamplerKind::Tabu),
            other => Err(NbmfError::Validation(format!(
                "unknown sampler `{other}` (expected exhaustive, sa or tabu)"
            ))),
        }
    }
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerBudget {
    /// Independent reads (anneal cycles for SA, restarts for tabu).
    pub num_reads: usize,
    /// Temperature steps per SA read; each step visits every variable once.
    pub sweeps_per_read: usize,
    /// Tabu restarts after this many consecutive non-improving moves.
    pub max_non_improving_moves: usize,
    /// Optional wall-clock limit; when set, reads stop early once exceeded.
    pub time_cap: Option<Duration>,
}

impl Default for SamplerBudget {
    fn default() -> Self {
        SamplerBudget {
            num_reads: 100,
            sweeps_per_read: 50,
            max_non_improving_moves: 100,
            time_cap: None,
        }
    }
}

impl SamplerBudget {
    pub fn with_reads(mut self, num_reads: usize) -> Self {
        self.num_reads = num_reads;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.num_reads == 0 {
            return Err(NbmfError::Validation("num_reads must be at least 1".into()));
        }
        if self.sweeps_per_read == 0 {
            return Err(NbmfError::Validation("sweeps_per_read must be at least 1".into()));
        }
        if self.max_non_improving_moves == 0 {
            return Err(NbmfError::Validation(
                "max_non_improving_moves must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub bits: Vec<u8>,
    pub energy: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    /// Candidate evaluations (exhaustive), sweeps (SA) or moves (tabu).
    pub budget_used: u64,
}

impl SampleSet {
    /// Minimum-energy sample; the first one wins ties.
    pub fn best(&self) -> Result<&Sample> {
        best_of(self)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub fn best_of(set: &SampleSet) -> Result<&Sample> {
    let mut iter = set.samples.iter();
    let mut best = iter
        .next()
        .ok_or_else(|| NbmfError::EmptyInput("sample set has no samples".into()))?;
    for s in iter {
        if s.energy < best.energy {
            best = s;
        }
    }
    Ok(best)
}

/// A sampler configuration: which algorithm, and how much work per solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampler {
    pub kind: SamplerKind,
    pub budget: SamplerBudget,
    /// Tabu tenure; `None` means `min(20, k)`.
    pub tabu_tenure: Option<usize>,
}

/// Outcome of racing a sampler against a target energy.
#[derive(Clone, Debug, PartialEq)]
pub struct RaceOutcome {
    pub reached: bool,
    pub reads: usize,
    pub best_energy: f64,
}

impl Sampler {
    pub fn new(kind: SamplerKind, budget: SamplerBudget) -> Self {
        Sampler {
            kind,
            budget,
            tabu_tenure: None,
        }
    }

    pub fn exhaustive() -> Self {
        Sampler::new(SamplerKind::Exhaustive, SamplerBudget::default().with_reads(1))
    }

    pub fn annealing(num_reads: usize, sweeps_per_read: usize) -> Self {
        Sampler::new(
            SamplerKind::Annealing,
            SamplerBudget {
                num_reads,
                sweeps_per_read,
                ..SamplerBudget::default()
            },
        )
    }

    pub fn tabu(num_reads: usize, max_non_improving_moves: usize) -> Self {
        Sampler::new(
            SamplerKind::Tabu,
            SamplerBudget {
                num_reads,
                max_non_improving_moves,
                ..SamplerBudget::default()
            },
        )
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// Largest variable count this sampler accepts.
    pub fn max_variables(&self) -> usize {
        match self.kind {
            SamplerKind::Exhaustive => EXHAUSTIVE_MAX_VARIABLES,
            _ => usize::MAX,
        }
    }

    pub fn with_reads(&self, num_reads: usize) -> Sampler {
        let mut s = self.clone();
        s.budget.num_reads = num_reads;
        s
    }

    pub fn sample(&self, qubo: &Qubo, rng: &SeedStream) -> Result<SampleSet> {
        match self.kind {
            SamplerKind::Exhaustive => solve_exhaustive(qubo),
            SamplerKind::Annealing => solve_sa(qubo, &self.budget, rng),
            SamplerKind::Tabu => solve_tabu_with_tenure(qubo, &self.budget, self.tabu_tenure, rng),
        }
    }

    /// Runs reads `0, 1, 2, …` (the same reads [`Sampler::sample`] would
    /// produce) until one reaches `target` or `deadline` passes. The read
    /// count is not limited by the budget. Exhaustive search stops after its
    /// single read.
    pub fn race(&self, qubo: &Qubo, target: f64, rng: &SeedStream, deadline: Instant) -> Result<RaceOutcome> {
        let engine = Engine::prepare(self, qubo, rng)?;
        let mut best = f64::INFINITY;
        let mut reads = 0;
        loop {
            let (sample, _) = engine.run_read(reads, rng);
            reads += 1;
            best = best.min(sample.energy);
            if best <= target + TARGET_SLACK {
                return Ok(RaceOutcome { reached: true, reads, best_energy: best });
            }
            if self.kind == SamplerKind::Exhaustive || Instant::now() >= deadline {
                return Ok(RaceOutcome { reached: false, reads, best_energy: best });
            }
        }
    }
}

pub fn solve_exhaustive(qubo: &Qubo) -> Result<SampleSet> {
    let k = qubo.num_variables();
    if k > EXHAUSTIVE_MAX_VARIABLES {
        return Err(NbmfError::Capacity {
            requested: k,
            limit: EXHAUSTIVE_MAX_VARIABLES,
        });
    }
    let (sample, evaluations) = enumerate_minimum(qubo);
    Ok(SampleSet {
        samples: vec![sample],
        budget_used: evaluations,
    })
}

pub fn solve_sa(qubo: &Qubo, budget: &SamplerBudget, rng: &SeedStream) -> Result<SampleSet> {
    let sampler = Sampler::new(SamplerKind::Annealing, budget.clone());
    run_reads(&sampler, qubo, rng)
}

pub fn solve_tabu(qubo: &Qubo, budget: &SamplerBudget, rng: &SeedStream) -> Result<SampleSet> {
    solve_tabu_with_tenure(qubo, budget, None, rng)
}

pub fn solve_tabu_with_tenure(
    qubo: &Qubo,
    budget: &SamplerBudget,
    tenure: Option<usize>,
    rng: &SeedStream,
) -> Result<SampleSet> {
    let mut sampler = Sampler::new(SamplerKind::Tabu, budget.clone());
    sampler.tabu_tenure = tenure;
    run_reads(&sampler, qubo, rng)
}

fn run_reads(sampler: &Sampler, qubo: &Qubo, rng: &SeedStream) -> Result<SampleSet> {
    sampler.budget.validate()?;
    let engine = Engine::prepare(sampler, qubo, rng)?;
    let reads: Vec<(Sample, u64)> = match sampler.budget.time_cap {
        None => par::map_indexed(sampler.budget.num_reads, |r| engine.run_read(r, rng)),
        Some(cap) => {
            let start = Instant::now();
            let mut out = Vec::with_capacity(sampler.budget.num_reads);
            for r in 0..sampler.budget.num_reads {
                out.push(engine.run_read(r, rng));
                if start.elapsed() >= cap {
                    break;
                }
            }
            out
        }
    };
    let budget_used = reads.iter().map(|(_, work)| work).sum();
    Ok(SampleSet {
        samples: reads.into_iter().map(|(s, _)| s).collect(),
        budget_used,
    })
}

/// Per-QUBO state shared by every read of one solve.
struct Engine<'a> {
    qubo: &'a Qubo,
    couplings: Vec<f64>,
    mode: Mode,
}

enum Mode {
    Exhaustive,
    Anneal { t_hot: f64, t_cold: f64, sweeps: usize },
    Tabu { tenure: usize, patience: usize },
}

impl<'a> Engine<'a> {
    fn prepare(sampler: &Sampler, qubo: &'a Qubo, rng: &SeedStream) -> Result<Self> {
        let k = qubo.num_variables();
        if k > sampler.max_variables() {
            return Err(NbmfError::Capacity {
                requested: k,
                limit: sampler.max_variables(),
            });
        }
        let couplings = qubo.symmetric_couplings();
        let mode = match sampler.kind {
            SamplerKind::Exhaustive => Mode::Exhaustive,
            SamplerKind::Annealing => {
                let (t_hot, t_cold) = anneal_schedule(qubo, &couplings, &mut rng.fork(PROBE_TAG));
                Mode::Anneal {
                    t_hot,
                    t_cold,
                    sweeps: sampler.budget.sweeps_per_read.max(1),
                }
            }
            SamplerKind::Tabu => Mode::Tabu {
                tenure: sampler.tabu_tenure.unwrap_or(20.min(k)),
                patience: sampler.budget.max_non_improving_moves.max(1),
            },
        };
        Ok(Engine { qubo, couplings, mode })
    }

    fn run_read(&self, read: usize, rng: &SeedStream) -> (Sample, u64) {
        match self.mode {
            Mode::Exhaustive => enumerate_minimum(self.qubo),
            Mode::Anneal { t_hot, t_cold, sweeps } => {
                self.anneal(t_hot, t_cold, sweeps, &mut rng.fork(read as u64))
            }
            Mode::Tabu { tenure, patience } => self.tabu(tenure, patience, &mut rng.fork(read as u64)),
        }
    }

    fn random_state(&self, rng: &mut SeedStream) -> (Vec<u8>, Vec<f64>) {
        let k = self.qubo.num_variables();
        let bits: Vec<u8> = (0..k).map(|_| rng.coin() as u8).collect();
        let fields = local_fields(self.qubo, &self.couplings, &bits);
        (bits, fields)
    }

    #[inline]
    fn flip(&self, bits: &mut [u8], fields: &mut [f64], j: usize) {
        let k = bits.len();
        bits[j] ^= 1;
        let sign = if bits[j] == 1 { 1.0 } else { -1.0 };
        let row = &self.couplings[j * k..(j + 1) * k];
        for (f, &s) in fields.iter_mut().zip(row) {
            *f += sign * s;
        }
    }

    fn finish(&self, bits: Vec<u8>) -> Sample {
        let energy = self.qubo.energy_unchecked(&bits);
        Sample { bits, energy }
    }

    fn anneal(&self, t_hot: f64, t_cold: f64, sweeps: usize, rng: &mut SeedStream) -> (Sample, u64) {
        let k = self.qubo.num_variables();
        let (mut bits, mut fields) = self.random_state(rng);
        let mut energy = self.qubo.energy_unchecked(&bits);
        let mut best_energy = energy;
        let mut best_bits = bits.clone();
        let ratio = t_cold / t_hot;
        for sweep in 0..sweeps {
            let frac = if sweeps > 1 {
                sweep as f64 / (sweeps - 1) as f64
            } else {
                1.0
            };
            let temperature = t_hot * ratio.powf(frac);
            for j in 0..k {
                let delta = if bits[j] == 1 { -fields[j] } else { fields[j] };
                if delta <= 0.0 || rng.next_f64() < (-delta / temperature).exp() {
                    self.flip(&mut bits, &mut fields, j);
                    energy += delta;
                    if energy < best_energy {
                        best_energy = energy;
                        best_bits.copy_from_slice(&bits);
                    }
                }
            }
        }
        (self.finish(best_bits), sweeps as u64)
    }

    fn tabu(&self, tenure: usize, patience: usize, rng: &mut SeedStream) -> (Sample, u64) {
        let k = self.qubo.num_variables();
        let (mut bits, mut fields) = self.random_state(rng);
        let mut energy = self.qubo.energy_unchecked(&bits);
        let mut best_energy = energy;
        let mut best_bits = bits.clone();
        // Variable j is tabu while `iter < tabu_until[j]`; at most k-1 are tabu at once.
        let tenure = tenure.min(k.saturating_sub(1));
        let mut tabu_until = vec![0usize; k];
        let mut last_moved = vec![0usize; k];
        let mut stale = 0;
        let mut iter = 0usize;
        while stale < patience {
            iter += 1;
            let mut chosen: Option<(usize, f64)> = None;
            for j in 0..k {
                let delta = if bits[j] == 1 { -fields[j] } else { fields[j] };
                let allowed = iter >= tabu_until[j] || energy + delta < best_energy - 1e-12 * (1.0 + best_energy.abs());
                if allowed && chosen.is_none_or(|(_, d)| delta < d) {
                    chosen = Some((j, delta));
                }
            }
            let (j, delta) = chosen.unwrap_or_else(|| {
                let j = (0..k).min_by_key(|&j| last_moved[j]).unwrap_or(0);
                (j, if bits[j] == 1 { -fields[j] } else { fields[j] })
            });
            self.flip(&mut bits, &mut fields, j);
            energy += delta;
            tabu_until[j] = iter + tenure + 1;
            last_moved[j] = iter;
            let margin = 1e-12 * (1.0 + best_energy.abs());
            if energy < best_energy - margin {
                // Resync so rounding drift cannot fake an improvement.
                energy = self.qubo.energy_unchecked(&bits);
            }
            if energy < best_energy - margin {
                best_energy = energy;
                best_bits.copy_from_slice(&bits);
                stale = 0;
            } else {
                stale += 1;
            }
            if k == 0 {
                break;
            }
        }
        (self.finish(best_bits), iter as u64)
    }
}

fn local_fields(qubo: &Qubo, couplings: &[f64], bits: &[u8]) -> Vec<f64> {
    let k = bits.len();
    (0..k)
        .map(|j| {
            let row = &couplings[j * k..(j + 1) * k];
            qubo.linear()[j]
                + row
                    .iter()
                    .zip(bits)
                    .filter(|(_, &b)| b == 1)
                    .map(|(s, _)| s)
                    .sum::<f64>()
        })
        .collect()
}

/// `(T_hot, T_cold)`: the largest single-flip change seen on random probe
/// states is accepted uphill with probability 0.8 at `T_hot`; `T_cold` is
/// 1% of the mean linear coefficient magnitude.
fn anneal_schedule(qubo: &Qubo, couplings: &[f64], rng: &mut SeedStream) -> (f64, f64) {
    let k = qubo.num_variables();
    let mut max_delta: f64 = 0.0;
    for _ in 0..PROBE_STATES {
        let bits: Vec<u8> = (0..k).map(|_| rng.coin() as u8).collect();
        for (j, f) in local_fields(qubo, couplings, &bits).into_iter().enumerate() {
            let delta = if bits[j] == 1 { -f } else { f };
            max_delta = max_delta.max(delta.abs());
        }
    }
    let t_hot = if max_delta > 0.0 && max_delta.is_finite() {
        max_delta / (1.0 / UPHILL_ACCEPTANCE).ln()
    } else {
        1.0
    };
    let mean_abs = if k > 0 {
        qubo.linear().iter().map(|a| a.abs()).sum::<f64>() / k as f64
    } else {
        0.0
    };
    let mut t_cold = COLD_FRACTION * mean_abs;
    if !(t_cold > 0.0 && t_cold.is_finite()) {
        t_cold = t_hot * 1e-3;
    }
    (t_hot, t_cold.min(t_hot))
}

/// Global minimiser by Gray-code enumeration. Bit index 0 is the most
/// significant position of the code, so comparing codes compares bit vectors
/// lexicographically; ties go to the smaller code.
fn enumerate_minimum(qubo: &Qubo) -> (Sample, u64) {
    let k = qubo.num_variables();
    if k == 0 {
        return (Sample { bits: vec![], energy: 0.0 }, 1);
    }
    let couplings = qubo.symmetric_couplings();
    let mut bits = vec![0u8; k];
    let mut fields = qubo.linear().to_vec();
    let mut energy = 0.0;
    let mut best_energy: f64 = 0.0;
    let mut best_code: u64 = 0;
    let total: u64 = 1 << k;
    for i in 1..total {
        let pos = i.trailing_zeros() as usize;
        let j = k - 1 - pos;
        let delta = if bits[j] == 1 { -fields[j] } else { fields[j] };
        bits[j] ^= 1;
        let sign = if bits[j] == 1 { 1.0 } else { -1.0 };
        let row = &couplings[j * k..(j + 1) * k];
        for (f, &s) in fields.iter_mut().zip(row) {
            *f += sign * s;
        }
        energy += delta;
        let code = i ^ (i >> 1);
        let tol = 1e-12 * (1.0 + best_energy.abs());
        if energy < best_energy - tol || (energy <= best_energy + tol && code < best_code) {
            best_energy = energy;
            best_code = code;
        }
    }
    let best_bits: Vec<u8> = (0..k).map(|j| ((best_code >> (k - 1 - j)) & 1) as u8).collect();
    let energy = qubo.energy_unchecked(&best_bits);
    (Sample { bits: best_bits, energy }, total)
}
