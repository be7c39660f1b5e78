//! The `nbmf` command line.
//!
//! Exit codes: 0 on success, 2 for usage or input errors, 1 for anything else.
//! Progress goes to stderr; artifacts go to files under `--out`.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::als::{nbmf_observed, FactorizationResult, StopReason};
use crate::bench::{run_campaign, BenchConfig};
use crate::config::FactorizationConfig;
use crate::error::{NbmfError, Result};
use crate::io::{
    load_binary_csv, load_csv_matrix, load_pgm_directory, render_feature_grid, render_reconstruction, write_binary_csv,
    write_csv_matrix, write_csv_rows, write_pgm, write_pgm_directory, write_records, Contrast, PgmFormat,
};
use crate::matrix::{frobenius_residual, DenseMatrix, MatrixView};
use crate::metrics::{default_zero_tol, ratio_of_residuals, sparsity, storage_report, StorageReport};
use crate::nmf::nmf_baseline;
use crate::par;
use crate::rng::SeedStream;
use crate::samplers::{Sampler, SamplerBudget, SamplerKind};
use crate::synth::{planted, synthetic_faces};

/// Largest k the annealer hardware comfortably supported.
const HARDWARE_K: usize = 35;

#[derive(Debug, Parser)]
#[command(name = "nbmf", version, about = "Nonnegative/binary matrix factorization with QUBO samplers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Factorize V ≈ W H with W ≥ 0 and binary H.
    Factorize(FactorizeArgs),
    /// Cumulative time-to-targets benchmark of QUBO samplers.
    Benchmark(BenchmarkArgs),
    /// Render features and reconstructions as PGM images.
    Render(RenderArgs),
    /// Sparsity, residuals, NMF comparison and storage accounting.
    Metrics(MetricsArgs),
    /// Generate synthetic inputs.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV matrix or a directory of PGM images (one column per image).
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct FactorizeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, default_value = "sa")]
    sampler: SamplerKind,
    /// Reads (anneals or tabu restarts) per column QUBO.
    #[arg(long, default_value_t = 100)]
    reads: usize,
    #[arg(long, default_value_t = 50)]
    sweeps: usize,
    #[arg(long, default_value_t = 100)]
    max_non_improving: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    rel_tol: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    #[command(flatten)]
    factorize: FactorizeArgs,
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
    anneal_counts: Vec<usize>,
    #[arg(long, default_value_t = 200.0)]
    per_read_us: f64,
    #[arg(long, default_value_t = 10.0)]
    cap_s: f64,
    #[arg(long, default_value = "sa")]
    reference: SamplerKind,
    #[arg(long, value_delimiter = ',', default_value = "tabu,exhaustive")]
    challengers: Vec<String>,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// W as CSV (one feature per column).
    #[arg(long)]
    w: PathBuf,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long, default_value_t = 5)]
    grid_cols: usize,
    /// Data (CSV or PGM directory) for reconstructions; needs --h.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    h: Option<PathBuf>,
    /// Columns of V to reconstruct.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    columns: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    w: PathBuf,
    #[arg(long)]
    h: PathBuf,
    /// Compare against this factorization instead of an NMF run.
    #[arg(long, requires = "compare_h")]
    compare_w: Option<PathBuf>,
    #[arg(long, requires = "compare_w")]
    compare_h: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    nmf_iters: usize,
    #[arg(long, default_value_t = 64)]
    float_bits: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for metrics.json; the summary also goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SynthKind {
    Faces,
    Planted,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(value_enum)]
    kind: SynthKind,
    /// Images (faces) or columns (planted).
    #[arg(long, default_value_t = 64)]
    count: usize,
    #[arg(long, default_value_t = 19)]
    width: usize,
    #[arg(long, default_value_t = 19)]
    height: usize,
    /// Rows of a planted V.
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return 2;
    }
    let outcome = match cli.command {
        Command::Factorize(a) => cmd_factorize(&a),
        Command::Benchmark(a) => cmd_benchmark(&a),
        Command::Render(a) => cmd_render(&a),
        Command::Metrics(a) => cmd_metrics(&a),
        Command::Synth(a) => cmd_synth(&a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}

fn configure_threads() -> Result<()> {
    match std::env::var("NBMF_THREADS") {
        Ok(s) => {
            let n: usize = s
                .trim()
                .parse()
                .map_err(|_| NbmfError::Validation(format!("NBMF_THREADS must be a nonnegative integer, got `{s}`")))?;
            par::configure_threads(n);
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

struct Input {
    matrix: DenseMatrix,
    image_size: Option<(usize, usize)>,
}

fn load_input(path: &Path) -> Result<Input> {
    if path.is_dir() {
        let ds = load_pgm_directory(path)?;
        Ok(Input {
            image_size: Some((ds.width, ds.height)),
            matrix: ds.matrix,
        })
    } else {
        Ok(Input {
            matrix: load_csv_matrix(path, true)?,
            image_size: None,
        })
    }
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| NbmfError::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| NbmfError::io(path, std::io::Error::other(e)))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| NbmfError::io(path, e))
}

fn sampler_from(kind: SamplerKind, args: &FactorizeArgs) -> Result<Sampler> {
    if args.reads == 0 {
        return Err(NbmfError::Validation("--reads must be at least 1".into()));
    }
    Ok(Sampler::new(
        kind,
        SamplerBudget {
            num_reads: args.reads,
            sweeps_per_read: args.sweeps,
            max_non_improving_moves: args.max_non_improving,
            time_cap: None,
        },
    ))
}

fn factorization_config(args: &FactorizeArgs, sampler: Sampler) -> Result<FactorizationConfig> {
    if args.k > HARDWARE_K {
        eprintln!("warning: k = {} exceeds {HARDWARE_K}, the largest size the annealer hardware supported", args.k);
    }
    let mut cfg = FactorizationConfig::new(args.k, sampler)
        .with_seed(args.seed)
        .with_alpha(args.alpha);
    cfg.max_outer_iters = args.max_iters;
    cfg.rel_tol = args.rel_tol;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct RunSummary<'a> {
    input: String,
    rows: usize,
    columns: usize,
    image_width: Option<usize>,
    image_height: Option<usize>,
    config: &'a FactorizationConfig,
    outer_iters: usize,
    qubo_solves: usize,
    stop_reason: StopReason,
    final_residual: f64,
}

fn cmd_factorize(args: &FactorizeArgs) -> Result<()> {
    let input = load_input(&args.input.input)?;
    let cfg = factorization_config(args, sampler_from(args.sampler, args)?)?;
    let v = &input.matrix;
    create_out(&args.out)?;
    let m = v.cols();
    eprintln!("factorizing {}x{m} with k={} using {}", v.rows(), cfg.k, cfg.sampler.name());

    let logs_path = args.out.join("logs.jsonl");
    let file = fs::File::create(&logs_path).map_err(|e| NbmfError::io(&logs_path, e))?;
    let mut logs = BufWriter::new(file);
    let mut write_error: Option<NbmfError> = None;
    let result = nbmf_observed(v, &cfg, &mut |log, _| {
        if write_error.is_none() {
            let line = serde_json::to_string(log).expect("column logs serialize");
            if let Err(e) = writeln!(logs, "{line}") {
                write_error = Some(NbmfError::io(&logs_path, e));
            }
        }
        if log.column_index + 1 == m {
            eprintln!("  iteration {} done", log.outer_iter + 1);
        }
    })?;
    if let Some(e) = write_error {
        return Err(e);
    }
    logs.flush().map_err(|e| NbmfError::io(&logs_path, e))?;
    write_factorization(&args.out, &result)?;
    write_json(
        &args.out.join("run.json"),
        &RunSummary {
            input: args.input.input.display().to_string(),
            rows: v.rows(),
            columns: m,
            image_width: input.image_size.map(|s| s.0),
            image_height: input.image_size.map(|s| s.1),
            config: &cfg,
            outer_iters: result.outer_iters,
            qubo_solves: result.qubo_solves,
            stop_reason: result.stop_reason,
            final_residual: *result.objective_history.last().unwrap_or(&f64::NAN),
        },
    )?;
    eprintln!(
        "stopped after {} iterations ({:?}), residual {:.6}",
        result.outer_iters,
        result.stop_reason,
        result.objective_history.last().unwrap_or(&f64::NAN)
    );
    Ok(())
}

fn write_factorization(out: &Path, result: &FactorizationResult) -> Result<()> {
    write_csv_matrix(&out.join("W.csv"), &result.w)?;
    write_binary_csv(&out.join("H.csv"), &result.h)?;
    write_csv_rows(
        &out.join("history.csv"),
        std::iter::once(vec!["iteration".to_string(), "residual".to_string()]).chain(
            result
                .objective_history
                .iter()
                .enumerate()
                .map(|(i, r)| vec![(i + 1).to_string(), format!("{r:?}")]),
        ),
    )
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<()> {
    let fa = &args.factorize;
    let names: Vec<&str> = args.challengers.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        return Err(NbmfError::Validation("--challengers must name at least one sampler".into()));
    }
    let challengers = names
        .iter()
        .map(|s| {
            s.parse::<SamplerKind>().and_then(|kind| sampler_from(kind, fa))
        })
        .collect::<Result<Vec<_>>>()?;
    if !(args.per_read_us > 0.0 && args.per_read_us.is_finite()) {
        return Err(NbmfError::Validation(format!("--per-read-us must be positive, got {}", args.per_read_us)));
    }
    if !(args.cap_s > 0.0 && args.cap_s.is_finite()) {
        return Err(NbmfError::Validation(format!("--cap-s must be positive, got {}", args.cap_s)));
    }
    let reference = sampler_from(args.reference, fa)?;
    let bench = BenchConfig {
        reference: reference.clone(),
        challengers,
        cap: Duration::from_secs_f64(args.cap_s),
        anneal_counts: args.anneal_counts.clone(),
        per_read_time: Duration::from_secs_f64(args.per_read_us * 1e-6),
    };
    bench.validate()?;
    let cfg = factorization_config(fa, reference)?;
    let input = load_input(&fa.input.input)?;
    create_out(&fa.out)?;
    eprintln!(
        "benchmark: reference {} at {:?} reads, challengers {}",
        bench.reference.name(),
        bench.anneal_counts,
        names.join(",")
    );
    let campaign = run_campaign(&input.matrix, &cfg, &bench)?;
    write_records(&campaign.records, &fa.out.join("records.jsonl"))?;
    write_json(&fa.out.join("summary.json"), &campaign.summary)?;
    for g in &campaign.summary.groups {
        for c in &g.challengers {
            eprintln!(
                "  {} reads: {} instances, reference {:.4} s, {} {:.4} s (<1 ms {}, >1 s {}, capped {})",
                g.anneal_count,
                g.instances,
                g.cumulative_reference_time_s,
                c.challenger,
                c.cumulative_time_s,
                c.under_1ms,
                c.over_1s,
                c.capped
            );
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct RenderMeta {
    feature_width: usize,
    feature_height: usize,
    features: usize,
    grid_cols: usize,
    absolute_white_level: f64,
    reconstructions: Vec<ReconstructionMeta>,
}

#[derive(Serialize)]
struct ReconstructionMeta {
    column: usize,
    selected: Vec<usize>,
}

fn image_size(args_w: Option<usize>, args_h: Option<usize>, from_input: Option<(usize, usize)>, n: usize) -> Result<(usize, usize)> {
    match (args_w, args_h, from_input) {
        (Some(w), Some(h), _) => Ok((w, h)),
        (None, None, Some(size)) => Ok(size),
        (None, None, None) => {
            let side = (n as f64).sqrt().round() as usize;
            if side * side == n {
                Ok((side, side))
            } else {
                Err(NbmfError::Validation(format!(
                    "{n} pixels per feature is not a square; pass --width and --height"
                )))
            }
        }
        _ => Err(NbmfError::Validation("--width and --height must be given together".into())),
    }
}

fn cmd_render(args: &RenderArgs) -> Result<()> {
    let w = load_csv_matrix(&args.w, true)?;
    let input = match (&args.input, &args.h) {
        (Some(i), Some(h)) => Some((load_input(i)?, load_binary_csv(h)?)),
        (None, None) => None,
        _ => return Err(NbmfError::Validation("--input and --h must be given together".into())),
    };
    let (width, height) = image_size(args.width, args.height, input.as_ref().and_then(|(i, _)| i.image_size), w.rows())?;
    create_out(&args.out)?;
    let absolute = render_feature_grid(&w, width, height, args.grid_cols, Contrast::Absolute)?;
    let rescaled = render_feature_grid(&w, width, height, args.grid_cols, Contrast::Rescaled)?;
    write_pgm(&args.out.join("features_absolute.pgm"), &absolute.image, PgmFormat::Plain)?;
    write_pgm(&args.out.join("features_rescaled.pgm"), &rescaled.image, PgmFormat::Plain)?;

    let mut reconstructions = Vec::new();
    if let Some((input, h)) = &input {
        let v = &input.matrix;
        for &c in &args.columns {
            if c >= v.cols() || c >= h.cols() {
                return Err(NbmfError::Validation(format!("column {c} is out of range")));
            }
            let r = render_reconstruction(&v.column(c), &w, &h.column(c), width, height)?;
            write_pgm(&args.out.join(format!("original_{c}.pgm")), &r.original, PgmFormat::Plain)?;
            write_pgm(&args.out.join(format!("reconstruction_{c}.pgm")), &r.reconstruction, PgmFormat::Plain)?;
            reconstructions.push(ReconstructionMeta {
                column: c,
                selected: r.selected,
            });
        }
    }
    write_json(
        &args.out.join("render.json"),
        &RenderMeta {
            feature_width: width,
            feature_height: height,
            features: w.cols(),
            grid_cols: args.grid_cols,
            absolute_white_level: absolute.white_level.unwrap_or(1.0),
            reconstructions,
        },
    )?;
    eprintln!(
        "rendered {} features as a {}x{} grid image",
        w.cols(),
        absolute.image.width,
        absolute.image.height
    );
    Ok(())
}

#[derive(Serialize)]
struct FactorMetrics {
    residual: f64,
    w_sparsity: f64,
    w_zero_tol: f64,
    h_sparsity: f64,
    h_zero_tol: f64,
}

#[derive(Serialize)]
struct MetricsReport {
    nbmf: FactorMetrics,
    comparison_kind: &'static str,
    comparison: FactorMetrics,
    /// Comparison residual over the NBMF residual.
    error_ratio: f64,
    storage: StorageReport,
}

fn factor_metrics<H: MatrixView>(v: &DenseMatrix, w: &DenseMatrix, h: &H, h_zero_tol: f64) -> Result<FactorMetrics> {
    let w_zero_tol = default_zero_tol(w);
    Ok(FactorMetrics {
        residual: frobenius_residual(v, w, h)?,
        w_sparsity: sparsity(w, w_zero_tol),
        w_zero_tol,
        h_sparsity: sparsity(h, h_zero_tol),
        h_zero_tol,
    })
}

fn cmd_metrics(args: &MetricsArgs) -> Result<()> {
    let v = load_input(&args.input.input)?.matrix;
    let w = load_csv_matrix(&args.w, true)?;
    let h = load_binary_csv(&args.h)?;
    let nbmf = factor_metrics(&v, &w, &h, 0.0)?;
    let (kind, comparison) = match (&args.compare_w, &args.compare_h) {
        (Some(cw), Some(ch)) => {
            let cw = load_csv_matrix(cw, true)?;
            let ch = load_csv_matrix(ch, true)?;
            ("factorization", factor_metrics(&v, &cw, &ch, default_zero_tol(&ch))?)
        }
        _ => {
            if args.nmf_iters == 0 {
                return Err(NbmfError::Validation("--nmf-iters must be at least 1".into()));
            }
            let nmf = nmf_baseline(&v, w.cols(), args.nmf_iters, &mut SeedStream::new(args.seed))?;
            ("nmf", factor_metrics(&v, &nmf.w, &nmf.h, default_zero_tol(&nmf.h))?)
        }
    };
    let ratio = ratio_of_residuals(comparison.residual, nbmf.residual);
    let report = MetricsReport {
        nbmf,
        comparison_kind: kind,
        comparison,
        error_ratio: ratio,
        storage: storage_report(&w, &h, args.float_bits),
    };
    if let Some(out) = &args.out {
        create_out(out)?;
        write_json(&out.join("metrics.json"), &report)?;
    }
    let text = serde_json::to_string(&report).expect("metrics serialize");
    println!("{text}");
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    match args.kind {
        SynthKind::Faces => {
            let ds = synthetic_faces(args.count, args.width, args.height, args.seed)?;
            write_pgm_directory(&ds, &args.out)?;
            eprintln!("wrote {} {}x{} images to {}", ds.count(), ds.width, ds.height, args.out.display());
        }
        SynthKind::Planted => {
            let p = planted(args.n, args.count, args.k, args.seed)?;
            create_out(&args.out)?;
            write_csv_matrix(&args.out.join("V.csv"), &p.v)?;
            write_csv_matrix(&args.out.join("W.csv"), &p.w)?;
            write_binary_csv(&args.out.join("H.csv"), &p.h)?;
            eprintln!("wrote planted {}x{} instance with k={} to {}", args.n, args.count, args.k, args.out.display());
        }
    }
    Ok(())
}
