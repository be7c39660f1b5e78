mod common;

use std::time::Duration;

use proptest::prelude::*;

use common::naive_residual_sq;
use nbmf::bench::TttRecord;
use nbmf::io::{load_csv_matrix, read_records, write_csv_matrix, write_records};
use nbmf::metrics::{error_ratio, sparsity, storage_report};
use nbmf::{
    best_of, build_column_qubo, frobenius_residual, solve_exhaustive, update_h, update_w, BinaryMatrix, DenseMatrix,
    NnlsConfig, Sample, SampleSet, Sampler, SamplerBudget, SeedStream,
};

fn dense(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = SeedStream::new(seed);
    DenseMatrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.next_f64()).collect()).unwrap()
}

fn binary(rows: usize, cols: usize, seed: u64) -> BinaryMatrix {
    let mut rng = SeedStream::new(seed);
    BinaryMatrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.coin() as u8).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_plus_offset_is_squared_residual(n in 1usize..20, k in 1usize..10, seed in any::<u64>()) {
        let w = dense(n, k, seed);
        let v = dense(n, 1, seed ^ 1).into_vec();
        let q = binary(1, k, seed ^ 2).as_slice().to_vec();
        let qubo = build_column_qubo(&w, &v).unwrap();
        let lhs = qubo.evaluate_energy(&q).unwrap() + qubo.offset();
        let rhs = naive_residual_sq(&w, &v, &q);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1e-12));
    }

    #[test]
    fn energy_delta_matches_flip(k in 1usize..12, seed in any::<u64>(), j in 0usize..12) {
        let j = j % k;
        let qubo = build_column_qubo(&dense(6, k, seed), &dense(6, 1, seed ^ 3).into_vec()).unwrap();
        let q = binary(1, k, seed ^ 4).as_slice().to_vec();
        let mut flipped = q.clone();
        flipped[j] ^= 1;
        let direct = qubo.evaluate_energy(&flipped).unwrap() - qubo.evaluate_energy(&q).unwrap();
        prop_assert!((qubo.energy_delta(&q, j).unwrap() - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
    }

    #[test]
    fn sparsity_is_permutation_and_transpose_invariant(rows in 1usize..12, cols in 1usize..12, seed in any::<u64>()) {
        let m = dense(rows, cols, seed);
        let masked: Vec<f64> = m.as_slice().iter().map(|&x| if x < 0.4 { 0.0 } else { x }).collect();
        let m = DenseMatrix::from_vec(rows, cols, masked).unwrap();
        let s = sparsity(&m, 0.0);
        prop_assert_eq!(s, sparsity(&m.transpose(), 0.0));
        let mut rev = m.as_slice().to_vec();
        rev.reverse();
        prop_assert_eq!(s, sparsity(&DenseMatrix::from_vec(rows, cols, rev).unwrap(), 0.0));
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn error_ratio_of_a_factorization_with_itself_is_one(n in 1usize..8, m in 1usize..8, k in 1usize..4, seed in any::<u64>()) {
        let v = dense(n, m, seed);
        let w = dense(n, k, seed ^ 5);
        let h = binary(k, m, seed ^ 6);
        prop_assert_eq!(error_ratio(&v, &w, &h, &w, &h).unwrap(), 1.0);
    }

    #[test]
    fn storage_ratio_equals_float_bits(k in 1usize..40, m in 1usize..300, bits in prop_oneof![Just(16u32), Just(32), Just(64)]) {
        let report = storage_report(&DenseMatrix::zeros(3, k), &BinaryMatrix::zeros(k, m), bits);
        prop_assert_eq!(report.h_ratio, bits as f64);
        prop_assert_eq!(report.binary_h_bits, (k * m) as u64);
    }

    #[test]
    fn update_w_is_nonnegative_and_row_equivariant(n in 2usize..10, m in 1usize..12, k in 1usize..5, seed in any::<u64>()) {
        let v = dense(n, m, seed);
        let h = binary(k, m, seed ^ 7);
        let cfg = NnlsConfig::default();
        let w = update_w(&v, &h, &cfg, None).unwrap();
        prop_assert!(w.as_slice().iter().all(|&x| x >= 0.0));
        let rows: Vec<Vec<f64>> = (0..n).rev().map(|r| v.row(r).to_vec()).collect();
        let flipped = update_w(&DenseMatrix::from_rows(&rows).unwrap(), &h, &cfg, None).unwrap();
        for r in 0..n {
            prop_assert_eq!(w.row(r), flipped.row(n - 1 - r));
        }
    }

    #[test]
    fn best_of_is_the_first_minimum(energies in proptest::collection::vec(-5i32..5, 1..200)) {
        let samples: Vec<Sample> = energies
            .iter()
            .enumerate()
            .map(|(i, &e)| Sample { bits: vec![(i % 2) as u8], energy: e as f64 })
            .collect();
        let set = SampleSet { samples: samples.clone(), budget_used: 0 };
        let best = best_of(&set).unwrap();
        let mut scan = 0;
        for (i, s) in samples.iter().enumerate() {
            if s.energy < samples[scan].energy {
                scan = i;
            }
        }
        prop_assert_eq!(best, &samples[scan]);
    }

    #[test]
    fn csv_round_trip(rows in 1usize..20, cols in 1usize..10, seed in any::<u64>()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = dense(rows, cols, seed);
        write_csv_matrix(&path, &m).unwrap();
        prop_assert_eq!(load_csv_matrix(&path, true).unwrap(), m);
    }

    #[test]
    fn records_round_trip(count in 0usize..40, seed in any::<u64>()) {
        let mut rng = SeedStream::new(seed);
        let records: Vec<TttRecord> = (0..count)
            .map(|i| TttRecord {
                instance_id: i as u64,
                anneal_count: 10 * (1 + rng.below(1000)),
                outer_iter: rng.below(50),
                column: rng.below(2429),
                challenger: ["sa", "tabu", "exhaustive"][rng.below(3)].into(),
                target_energy: -100.0 * rng.next_f64(),
                time_to_target: Duration::from_nanos(rng.below(10_000_000_000) as u64),
                capped: rng.coin(),
                reference_time: Duration::from_micros(200 * rng.below(10_000) as u64),
                reads: rng.below(100),
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        write_records(&records, &path).unwrap();
        prop_assert_eq!(read_records(&path).unwrap(), records);
    }

    #[test]
    fn update_h_columns_are_independent(n in 2usize..8, m in 2usize..8, k in 1usize..6, seed in any::<u64>(), col in 0usize..8) {
        let col = col % m;
        let w = dense(n, k, seed);
        let v = dense(n, m, seed ^ 8);
        let rng = SeedStream::new(seed ^ 9);
        let (h, _) = update_h(&v, &w, &Sampler::exhaustive(), &rng).unwrap();
        let mut edited = v.clone();
        for c in (0..m).filter(|&c| c != col) {
            for r in 0..n {
                edited.set(r, c, 3.0 * v.get(r, c));
            }
        }
        let (h2, _) = update_h(&edited, &w, &Sampler::exhaustive(), &rng).unwrap();
        prop_assert_eq!(h.column(col), h2.column(col));
    }
}

#[test]
fn more_reads_never_hurt_on_average() {
    let qubos = common::nbmf_qubos(50, 12, 31);
    let (mut at_10, mut at_100) = (0.0, 0.0);
    for (i, q) in qubos.iter().enumerate() {
        let rng = SeedStream::new(500 + i as u64);
        let budget = SamplerBudget { sweeps_per_read: 5, ..SamplerBudget::default() };
        at_10 += nbmf::solve_sa(q, &budget.clone().with_reads(10), &rng).unwrap().best().unwrap().energy;
        at_100 += nbmf::solve_sa(q, &budget.with_reads(100), &rng).unwrap().best().unwrap().energy;
    }
    assert!(at_100 <= at_10, "{at_100} > {at_10}");
}

#[test]
fn heuristics_with_ample_reads_agree_with_exhaustive_up_to_k10() {
    for k in 1..=10 {
        for seed in 0..5u64 {
            let qubo = build_column_qubo(&dense(8, k, seed * 31 + k as u64), &dense(8, 1, seed).into_vec()).unwrap();
            let opt = solve_exhaustive(&qubo).unwrap().best().unwrap().energy;
            let rng = SeedStream::new(seed);
            for sampler in [Sampler::annealing(200, 100), Sampler::tabu(200, 100)] {
                let e = sampler.sample(&qubo, &rng).unwrap().best().unwrap().energy;
                assert!(e <= opt + 1e-9 * (1.0 + opt.abs()), "{} k={k}: {e} vs {opt}", sampler.name());
            }
        }
    }
}

#[test]
fn every_sample_reevaluates() {
    let qubo = build_column_qubo(&dense(10, 8, 1), &dense(10, 1, 2).into_vec()).unwrap();
    for sampler in [Sampler::exhaustive(), Sampler::annealing(30, 20), Sampler::tabu(30, 50)] {
        for s in &sampler.sample(&qubo, &SeedStream::new(3)).unwrap().samples {
            assert!((qubo.evaluate_energy(&s.bits).unwrap() - s.energy).abs() <= 1e-9 * (1.0 + s.energy.abs()));
        }
    }
}

#[test]
fn frobenius_matches_column_sums() {
    let v = dense(7, 9, 1);
    let w = dense(7, 3, 2);
    let h = binary(3, 9, 3);
    let total: f64 = (0..9).map(|c| naive_residual_sq(&w, &v.column(c), &h.column(c))).sum();
    assert!((frobenius_residual(&v, &w, &h).unwrap() - total.sqrt()).abs() < 1e-12);
}
