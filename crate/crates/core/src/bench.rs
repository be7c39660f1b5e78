//! Cumulative time-to-targets benchmark.
//!
//! A reference sampler solves every column QUBO met while factorizing; its
//! best energy becomes that instance's target. Each challenger then races to
//! an energy at least as good, and its wall-clock times are summed and
//! compared with the reference's modelled annealing time
//! (`reads × per_read_time`). Races that exceed the cap count as the cap.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::als::nbmf_observed;
use crate::config::FactorizationConfig;
use crate::error::{NbmfError, Result};
use crate::matrix::DenseMatrix;
use crate::qubo::Qubo;
use crate::rng::SeedStream;
use crate::samplers::Sampler;

mod duration_us {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_nanos() as f64 / 1000.0)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let us = f64::deserialize(d)?;
        if !(us >= 0.0 && us.is_finite()) {
            return Err(serde::de::Error::custom(format!("invalid duration {us} µs")));
        }
        Ok(Duration::from_nanos((us * 1000.0).round() as u64))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TttRecord {
    pub instance_id: u64,
    pub anneal_count: usize,
    pub outer_iter: usize,
    pub column: usize,
    pub challenger: String,
    pub target_energy: f64,
    #[serde(rename = "time_to_target_us", with = "duration_us")]
    pub time_to_target: Duration,
    pub capped: bool,
    #[serde(rename = "reference_time_us", with = "duration_us")]
    pub reference_time: Duration,
    /// Challenger reads (restarts) until success or cap.
    pub reads: usize,
}

/// One QUBO with the target a reference sampler set for it.
#[derive(Clone, Debug)]
pub struct TttInstance<'a> {
    pub instance_id: u64,
    pub anneal_count: usize,
    pub outer_iter: usize,
    pub column: usize,
    pub qubo: &'a Qubo,
    pub target_energy: f64,
    /// Seed the challenger draws from; the reference's own seed for the
    /// instance, so a challenger identical to the reference replays it.
    pub seed: u64,
    pub reference_time: Duration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Reference sampler; its read count is replaced by each anneal count.
    pub reference: Sampler,
    pub challengers: Vec<Sampler>,
    pub cap: Duration,
    pub anneal_counts: Vec<usize>,
    /// Modelled annealing time of one reference read.
    pub per_read_time: Duration,
}

impl BenchConfig {
    pub fn new(reference: Sampler, challengers: Vec<Sampler>) -> Self {
        BenchConfig {
            reference,
            challengers,
            cap: Duration::from_secs(10),
            anneal_counts: vec![10, 100, 1000, 10_000],
            per_read_time: Duration::from_micros(200),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cap.is_zero() {
            return Err(NbmfError::Validation("benchmark cap must be positive".into()));
        }
        if self.anneal_counts.is_empty() || self.anneal_counts.contains(&0) {
            return Err(NbmfError::Validation(
                "anneal counts must be a nonempty list of positive integers".into(),
            ));
        }
        if self.challengers.is_empty() {
            return Err(NbmfError::Validation("at least one challenger is required".into()));
        }
        Ok(())
    }
}

/// Times `challenger` from a cold start until it reaches the instance's
/// target (within [`crate::samplers::TARGET_SLACK`]) or `cap` elapses. The race runs
/// on the calling thread without inner parallelism.
pub fn run_ttt(instance: &TttInstance<'_>, challenger: &Sampler, cap: Duration) -> Result<TttRecord> {
    let rng = SeedStream::new(instance.seed);
    let start = Instant::now();
    let outcome = challenger.race(instance.qubo, instance.target_energy, &rng, start + cap)?;
    let elapsed = start.elapsed().max(Duration::from_nanos(1));
    let capped = !outcome.reached || elapsed >= cap;
    Ok(TttRecord {
        instance_id: instance.instance_id,
        anneal_count: instance.anneal_count,
        outer_iter: instance.outer_iter,
        column: instance.column,
        challenger: challenger.name().to_string(),
        target_energy: instance.target_energy,
        time_to_target: if capped { cap } else { elapsed },
        capped,
        reference_time: instance.reference_time,
        reads: outcome.reads,
    })
}

/// Best reference energy on one QUBO for each read count, all drawn from the
/// same stream. Smaller read counts see a prefix of the larger sample sets,
/// so the result is non-increasing whenever `counts` is non-decreasing.
pub fn target_monotonicity_check(qubo: &Qubo, reference: &Sampler, counts: &[usize], rng: &SeedStream) -> Result<Vec<f64>> {
    counts
        .iter()
        .map(|&n| Ok(reference.with_reads(n).sample(qubo, rng)?.best()?.energy))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChallengerSummary {
    pub challenger: String,
    pub records: usize,
    pub cumulative_time_ns: u64,
    pub cumulative_time_s: f64,
    /// Cumulative challenger time over cumulative reference time.
    pub ratio_to_reference: f64,
    pub under_1ms: usize,
    pub over_1s: usize,
    pub capped: usize,
    /// Instances where the challenger took longer than the reference's time.
    pub slower_than_reference: usize,
    pub max_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSummary {
    pub anneal_count: usize,
    pub instances: usize,
    pub cumulative_reference_time_ns: u64,
    pub cumulative_reference_time_s: f64,
    pub challengers: Vec<ChallengerSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub timer_resolution_ns: u64,
    pub per_read_time_us: f64,
    pub cap_s: f64,
    pub groups: Vec<AnnealSummary>,
}

#[derive(Clone, Debug)]
pub struct Campaign {
    pub records: Vec<TttRecord>,
    pub summary: CampaignSummary,
}

/// `instances × reads × per_read_time`.
pub fn cumulative_reference_time(instances: usize, reads: usize, per_read_time: Duration) -> Duration {
    Duration::from_nanos((per_read_time.as_nanos() * reads as u128 * instances as u128) as u64)
}

/// Smallest nonzero step of the monotonic clock seen over a short burst.
pub fn timer_resolution() -> Duration {
    let mut best = Duration::MAX;
    let mut last = Instant::now();
    for _ in 0..10_000 {
        let now = Instant::now();
        let step = now - last;
        if !step.is_zero() {
            best = best.min(step);
        }
        last = now;
    }
    if best == Duration::MAX {
        Duration::ZERO
    } else {
        best
    }
}

/// Aggregates records per anneal count (in `anneal_counts` order) and per
/// challenger (in first-seen order). Instances are counted as distinct
/// `instance_id`s.
pub fn summarize(
    records: &[TttRecord],
    anneal_counts: &[usize],
    per_read_time: Duration,
    cap: Duration,
    timer_resolution: Duration,
) -> CampaignSummary {
    let mut groups = Vec::new();
    for &count in anneal_counts {
        let in_group: Vec<&TttRecord> = records.iter().filter(|r| r.anneal_count == count).collect();
        let mut ids: Vec<u64> = in_group.iter().map(|r| r.instance_id).collect();
        ids.sort_unstable();
        ids.dedup();
        let reference = cumulative_reference_time(ids.len(), count, per_read_time);
        let mut names: Vec<&str> = Vec::new();
        for r in &in_group {
            if !names.contains(&r.challenger.as_str()) {
                names.push(&r.challenger);
            }
        }
        let challengers = names
            .into_iter()
            .map(|name| {
                let mine: Vec<&&TttRecord> = in_group.iter().filter(|r| r.challenger == name).collect();
                let total: Duration = mine.iter().map(|r| r.time_to_target).sum();
                ChallengerSummary {
                    challenger: name.to_string(),
                    records: mine.len(),
                    cumulative_time_ns: total.as_nanos() as u64,
                    cumulative_time_s: total.as_secs_f64(),
                    ratio_to_reference: if reference.is_zero() {
                        f64::INFINITY
                    } else {
                        total.as_secs_f64() / reference.as_secs_f64()
                    },
                    under_1ms: mine.iter().filter(|r| r.time_to_target < Duration::from_millis(1)).count(),
                    over_1s: mine.iter().filter(|r| r.time_to_target > Duration::from_secs(1)).count(),
                    capped: mine.iter().filter(|r| r.capped).count(),
                    slower_than_reference: mine.iter().filter(|r| r.time_to_target > r.reference_time).count(),
                    max_time_s: mine.iter().map(|r| r.time_to_target.as_secs_f64()).fold(0.0, f64::max),
                }
            })
            .collect();
        groups.push(AnnealSummary {
            anneal_count: count,
            instances: ids.len(),
            cumulative_reference_time_ns: reference.as_nanos() as u64,
            cumulative_reference_time_s: reference.as_secs_f64(),
            challengers,
        });
    }
    CampaignSummary {
        timer_resolution_ns: timer_resolution.as_nanos() as u64,
        per_read_time_us: per_read_time.as_nanos() as f64 / 1000.0,
        cap_s: cap.as_secs_f64(),
        groups,
    }
}

/// Factorizes `v` once per anneal count with the reference sampler and races
/// every challenger on every column QUBO encountered.
pub fn run_campaign(v: &DenseMatrix, cfg: &FactorizationConfig, bench: &BenchConfig) -> Result<Campaign> {
    bench.validate()?;
    let resolution = timer_resolution();
    let mut records = Vec::new();
    let mut next_id = 0u64;
    for &count in &bench.anneal_counts {
        let mut run_cfg = cfg.clone();
        run_cfg.sampler = bench.reference.with_reads(count);
        let reference_time = cumulative_reference_time(1, count, bench.per_read_time);
        let mut failure: Option<NbmfError> = None;
        nbmf_observed(v, &run_cfg, &mut |log, qubo| {
            if failure.is_some() {
                return;
            }
            let instance = TttInstance {
                instance_id: next_id,
                anneal_count: count,
                outer_iter: log.outer_iter,
                column: log.column_index,
                qubo,
                target_energy: log.target_energy,
                seed: log.seed,
                reference_time,
            };
            next_id += 1;
            for challenger in &bench.challengers {
                match run_ttt(&instance, challenger, bench.cap) {
                    Ok(record) => records.push(record),
                    Err(e) => {
                        failure = Some(e);
                        return;
                    }
                }
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
    }
    let summary = summarize(&records, &bench.anneal_counts, bench.per_read_time, bench.cap, resolution);
    Ok(Campaign { records, summary })
}
