//! Command-line surface: configure and run experiments, walks, and checks,
//! and emit machine-readable results.
//!
//! Every run reads one JSON config (`--config`), writes a JSON result and a
//! CSV table under `--out`, and embeds the resolved config, seed, and
//! artifact version in every output. Outputs are byte-identical for
//! identical (config, seed, version) regardless of thread count.
//!
//! Exit codes: 0 success, 1 numeric non-convergence, 2 config error.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::distributions::{estimate_sr_tail, estimate_wr_moment, thin_shell_check, Sampler, TailFit};
use crate::error::Error;
use crate::estimator::{
    counterexample_aubrun, counterexample_coupon, fixed_aspect_check, run_experiment,
    scaling_sweep, trace_concentration_check, ExperimentConfig,
};
use crate::rng::RngStream;
use crate::shifts::{barrier_walk, LowerShiftParams, UpperShiftParams, WalkParams};
use crate::stieltjes::{soft_edge, Side, SoftEdgeQuery};
use crate::symmat::eigendecompose;
use config::*;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "edgewalk", version, about = "Soft spectral edge laboratory")]
struct Cli {
    /// Path to the JSON run config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for JSON/CSV results.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "EDGEWALK_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Soft edges and extreme eigenvalues of a fixed matrix over a phi list.
    Edges,
    /// Rank-one barrier walk with per-step certificates.
    Walk,
    /// Monte Carlo covariance estimation statistics.
    Estimate,
    /// Minimal sample size sweep over dimensions.
    Sweep,
    /// Regularity estimators: projected tails, directional moments, thin shell.
    Tails,
    /// Norm blow-up (aubrun) or rank-failure (coupon) counterexample.
    Counterexample,
    /// Extreme eigenvalues at fixed aspect ratios with closed-form bounds.
    Fixedn,
    /// Trace concentration of heavy-tailed averages.
    Trace,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numeric(Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => format!("config error: {m}"),
            CliError::Numeric(e) => format!("numeric error: {e}"),
        }
    }
}

/// Errors raised while running an experiment: solver failures stay numeric,
/// anything rooted in input values is a config error.
fn classify(e: Error) -> CliError {
    match e {
        Error::EigenNoConvergence { .. }
        | Error::RootFind(_)
        | Error::NearSingularResolvent { .. }
        | Error::ResolventPole(_)
        | Error::Trial { .. } => CliError::Numeric(e),
        other => CliError::Config(other.to_string()),
    }
}

/// Entry point used by the binary; parses std::env args.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("edgewalk: {}", e.message());
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map(|t| t.get()).unwrap_or(1));
    // The global pool may already exist (repeat calls in one process); that
    // is fine because results are thread-count independent by contract.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();

    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Config(format!("cannot create output directory: {e}")))?;

    match cli.command {
        Command::Edges => cmd_edges(config_path, cli.seed, &cli.out),
        Command::Walk => cmd_walk(config_path, cli.seed, &cli.out),
        Command::Estimate => cmd_estimate(config_path, cli.seed, &cli.out),
        Command::Sweep => cmd_sweep(config_path, cli.seed, &cli.out),
        Command::Tails => cmd_tails(config_path, cli.seed, &cli.out),
        Command::Counterexample => cmd_counterexample(config_path, cli.seed, &cli.out),
        Command::Fixedn => cmd_fixedn(config_path, cli.seed, &cli.out),
        Command::Trace => cmd_trace(config_path, cli.seed, &cli.out),
    }
}

fn load_config<C: DeserializeOwned>(path: &Path) -> Result<C, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
}

fn config_hash<C: Serialize>(config: &C) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(16);
    for b in digest.iter().take(8) {
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    version: &'a str,
    seed: u64,
    config_hash: &'a str,
    config: &'a C,
    result: &'a R,
}

fn write_json<C: Serialize, R: Serialize>(
    out_dir: &Path,
    name: &str,
    seed: u64,
    hash: &str,
    config: &C,
    result: &R,
) -> Result<(), CliError> {
    let path = out_dir.join(format!("{name}.json"));
    let envelope = Envelope { version: VERSION, seed, config_hash: hash, config, result };
    let mut text = serde_json::to_string_pretty(&envelope)
        .map_err(|e| CliError::Config(format!("cannot serialize result: {e}")))?;
    text.push('\n');
    std::fs::write(&path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        // normalize -0 so equal results print identically
        "0".to_string()
    } else {
        format!("{v}")
    }
}

fn write_csv(
    out_dir: &Path,
    name: &str,
    seed: u64,
    hash: &str,
    columns: &[&str],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let path = out_dir.join(format!("{name}.csv"));
    let mut text = String::new();
    text.push_str("config_hash,seed,version");
    for c in columns {
        text.push(',');
        text.push_str(c);
    }
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        text.push_str(hash);
        let _ = write!(text, ",{seed},{VERSION}");
        for cell in row {
            text.push(',');
            text.push_str(cell);
        }
        text.push('\n');
    }
    std::fs::write(&path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct EdgeRow {
    phi: f64,
    lower_edge: f64,
    upper_edge: f64,
    lambda_min: f64,
    lambda_max: f64,
}

fn cmd_edges(config_path: &Path, seed_flag: Option<u64>, out: &Path) -> Result<(), CliError> {
    let mut cfg: EdgesConfig = load_config(config_path)?;
    if let Some(seed) = seed_flag {
        cfg.seed = seed;
    }
    let matrix = cfg.matrix.build().map_err(CliError::Config)?;
    let spec = eigendecompose(&matrix).map_err(classify)?;
    if cfg.phis.is_empty() {
        return Err(CliError::Config("phis must be nonempty".into()));
    }
    let mut rows = Vec::with_capacity(cfg.phis.len());
    for &phi in &cfg.phis {
        let lower_q = SoftEdgeQuery::new(Side::Lower, phi).map_err(|e| CliError::Config(e.to_string()))?;
        let upper_q = SoftEdgeQuery::new(Side::Upper, phi).map_err(|e| CliError::Config(e.to_string()))?;
        let lower = soft_edge(&spec, &lower_q).map_err(classify)?.edge;
        let upper = soft_edge(&spec, &upper_q).map_err(classify)?.edge;
        if !(lower < spec.lambda_min() && spec.lambda_max() < upper) {
            return Err(CliError::Numeric(Error::RootFind(format!(
                "edge ordering violated at phi = {phi}"
            ))));
        }
        rows.push(EdgeRow {
            phi,
            lower_edge: lower,
            upper_edge: upper,
            lambda_min: spec.lambda_min(),
            lambda_max: spec.lambda_max(),
        });
    }
    let hash = config_hash(&cfg);
    write_json(out, "edges", cfg.seed, &hash, &cfg, &rows)?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.phi),
                fmt_f64(r.lower_edge),
                fmt_f64(r.upper_edge),
                fmt_f64(r.lambda_min),
                fmt_f64(r.lambda_max),
            ]
        })
        .collect();
    write_csv(
        out,
        "edges",
        cfg.seed,
        &hash,
        &["phi", "lower_edge", "upper_edge", "lambda_min", "lambda_max"],
        &csv_rows,
    )
}

#[derive(Serialize)]
struct WalkSummary {
    side: Side,
    phi: f64,
    steps: usize,
    dim: usize,
    final_edge: f64,
    final_lambda_min: f64,
    final_lambda_max: f64,
    mean_exact_increment: f64,
    mean_explicit_shift: f64,
}

fn cmd_walk(config_path: &Path, seed_flag: Option<u64>, out: &Path) -> Result<(), CliError> {
    let mut cfg: WalkConfig = load_config(config_path)?;
    if let Some(seed) = seed_flag {
        cfg.seed = seed;
    }
    let sampler_spec = cfg.sampler.build_spec().map_err(CliError::Config)?;
    let sampler = Sampler::new(sampler_spec).map_err(|e| CliError::Config(e.to_string()))?;
    let params = match cfg.side.as_str() {
        "lower" => {
            let t = cfg.t.ok_or_else(|| CliError::Config("lower walk requires \"t\"".into()))?;
            WalkParams::Lower(
                LowerShiftParams::new(cfg.phi, t).map_err(|e| CliError::Config(e.to_string()))?,
            )
        }
        "upper" => {
            let tau = cfg.tau.ok_or_else(|| CliError::Config("upper walk requires \"tau\"".into()))?;
            WalkParams::Upper(
                UpperShiftParams::new(cfg.phi, tau).map_err(|e| CliError::Config(e.to_string()))?,
            )
        }
        other => return Err(CliError::Config(format!("side must be \"lower\" or \"upper\", got \"{other}\""))),
    };

    let state = barrier_walk(&sampler, cfg.steps, &params, cfg.seed).map_err(classify)?;
    let increments: Vec<f64> = state.shift_log.iter().map(|r| r.exact_increment).collect();
    let shifts: Vec<f64> = state.shift_log.iter().map(|r| r.explicit_shift).collect();
    let (mean_inc, _) = crate::stats::mean_and_se(&increments);
    let (mean_shift, _) = crate::stats::mean_and_se(&shifts);
    let summary = WalkSummary {
        side: state.side,
        phi: state.phi,
        steps: state.steps,
        dim: sampler.dim(),
        final_edge: state.edge,
        final_lambda_min: state.spectrum.lambda_min(),
        final_lambda_max: state.spectrum.lambda_max(),
        mean_exact_increment: if increments.is_empty() { 0.0 } else { mean_inc },
        mean_explicit_shift: if shifts.is_empty() { 0.0 } else { mean_shift },
    };

    let hash = config_hash(&cfg);
    write_json(out, "walk", cfg.seed, &hash, &cfg, &summary)?;

    // Row k = 0 carries the initial edge; rows k >= 1 log each update.
    let initial_edge = state
        .shift_log
        .first()
        .map(|r| r.edge_before)
        .unwrap_or(state.edge);
    let mut csv_rows = vec![vec![
        "0".to_string(),
        fmt_f64(initial_edge),
        fmt_f64(0.0),
        fmt_f64(0.0),
        fmt_f64(0.0),
        fmt_f64(0.0),
        "true".to_string(),
    ]];
    for r in &state.shift_log {
        csv_rows.push(vec![
            r.step.to_string(),
            fmt_f64(r.edge_after),
            fmt_f64(r.exact_increment),
            fmt_f64(r.explicit_shift),
            fmt_f64(r.diag_a),
            fmt_f64(r.diag_b),
            r.sufficient_ok.to_string(),
        ]);
    }
    write_csv(
        out,
        "walk",
        cfg.seed,
        &hash,
        &["k", "edge", "exact_increment", "explicit_shift", "diag_a", "diag_b", "sufficient_ok"],
        &csv_rows,
    )
}

fn cmd_estimate(config_path: &Path, seed_flag: Option<u64>, out: &Path) -> Result<(), CliError> {
    let mut cfg: EstimateConfig = load_config(config_path)?;
    if let Some(seed) = seed_flag {
        cfg.seed = seed;
    }
    let sampler_spec = cfg.sampler.build_spec().map_err(CliError::Config)?;
    let experiment = ExperimentConfig {
        sampler: sampler_spec,
        n_samples: cfg.n_samples,
        trials: cfg.trials,
        seed: cfg.seed,
        target_eps: cfg.target_eps,
    };
    let result = run_experiment(&experiment).map_err(classify)?;
    let hash = config_hash(&cfg);
    write_json(out, "estimate", cfg.seed, &hash, &cfg, &result)?;
    let row = vec![
        cfg.sampler.dim.to_string(),
        cfg.n_samples.to_string(),
        cfg.trials.to_string(),
        fmt_f64(result.mean_spectral_error),
        fmt_f64(result.mean_lambda_min),
        fmt_f64(result.mean_lambda_max),
        fmt_f64(result.mean_trace_gap),
        fmt_f64(result.error_quantiles.0),
        fmt_f64(result.error_quantiles.1),
        fmt_f64(result.error_quantiles.2),
        fmt_f64(result.se_spectral_error),
        fmt_f64(result.se_lambda_min),
        fmt_f64(result.se_lambda_max),
        fmt_f64(result.se_trace_gap),
    ];
    write_csv(
        out,
        "estimate",
        cfg.seed,
        &hash,
        &[
            "n",
            "n_samples",
            "trials",
            "mean_spectral_error",
            "mean_lambda_min",
            "mean_lambda_max",
            "mean_trace_gap",
            "error_q05",
            "error_q50",
            "error_q95",
            "se_spectral_error",
            "se_lambda_min",
            "se_lambda_max",
            "se_trace_gap",
        ],
        &[row],
    )
}

fn cmd_sweep(config_path: &Path, seed_flag: Option<u64>, out: &Path) -> Result<(), CliError> {
    let mut cfg: SweepConfig = load_config(config_path)?;
    if let Some(seed) = seed_flag {
        cfg.seed = seed;
    }
    let kind = SamplerConfig {
        kind: cfg.kind.clone(),
        dim: 1,
        alpha: cfg.alpha,
        base: None,
        base_alpha: None,
        sigma: None,
        known_params: None,
    }
    .build_kind()
    .map_err(CliError::Config)?;
    let points = scaling_sweep(&kind, cfg.eps, &cfg.n_values, cfg.trials, cfg.seed).map_err(classify)?;
    let hash = config_hash(&cfg);
    write_json(out, "sweep", cfg.seed, &hash, &cfg, &points)?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                p.n.to_string(),
                p.n_min.to_string(),
                p.censored.to_string(),
                fmt_f64(p.mean_error),
            ]
        })
        .collect();
    write_csv(out, "sweep", cfg.seed, &hash, &["n", "n_min", "censored", "mean_error"], &rows)
}

#[derive(Serialize)]
#[serde(untagged)]
enum TailsResult {
    Sr(crate::distributions::TailEstimate),
    Wr { eta: f64, directions: usize, max_moment: f64 },
    ThinShell { p: f64, ranks: Vec<usize>, ratios: Vec<f64> },
}

fn cmd_tails(config_path: &Path, seed_flag: Option<u64>, out: &Path) -> Result<(), CliError> {
    let mut cfg: TailsConfig = load_config(config_path)?;
    if let Some(seed) = seed_flag {
        cfg.seed = seed;
    }
    let sampler_spec = cfg.sampler.build_spec().map_err(CliError::Config)?;
    let sampler = Sampler::new(sampler_spec).map_err(|e| CliError::Config(e.to_string()))?;
    let mut rng = RngStream::new(cfg.seed, 0);
    let hash = config_hash(&cfg);

    match cfg.check.as_str() {
        "sr" => {
            let rank_k = cfg.rank_k.ok_or_else(|| CliError::Config("sr check requires \"rank_k\"".into()))?;
            let thresholds = cfg
                .thresholds
                .clone()
                .ok_or_else(|| CliError::Config("sr check requires \"thresholds\"".into()))?;
            let est = estimate_sr_tail(&sampler, rank_k, cfg.sample_count, &thresholds, &mut rng)
                .map_err(classify)?;
            write_json(out, "tails", cfg.seed, &hash, &cfg, &TailsResult::Sr(est.clone()))?;
            let fit_cols = match est.fit {
                TailFit::Fitted { c, eta, .. } => (fmt_f64(c), fmt_f64(eta)),
                TailFit::BelowResolution => ("below_resolution".to_string(), "below_resolution".to_string()),
            };
            let rows: Vec<Vec<String>> = est
                .thresholds
                .iter()
                .zip(&est.empirical_probs)
                .map(|(t, p)| {
                    vec![
                        est.rank_k.to_string(),
                        fmt_f64(*t),
                        fmt_f64(*p),
                        fit_cols.0.clone(),
                        fit_cols.1.clone(),
                    ]
                })
                .collect();
            write_csv(
                out,
                "tails",
                cfg.seed,
                &hash,
                &["rank_k", "threshold", "exceedance_prob", "fitted_c", "fitted_eta"],
                &rows,
            )
        }
        "wr" => {
            let eta = cfg.eta.ok_or_else(|| CliError::Config("wr check requires \"eta\"".into()))?;
            let directions = cfg.direction_count.unwrap_or(64);
            let max_moment = estimate_wr_moment(&sampler, eta, directions, cfg.sample_count, &mut rng)
                .map_err(classify)?;
            write_json(
                out,
                "tails",
                cfg.seed,
                &hash,
                &cfg,
                &TailsResult::Wr { eta, directions, max_moment },
            )?;
            let row = vec![fmt_f64(eta), directions.to_string(), fmt_f64(max_moment)];
            write_csv(out, "tails", cfg.seed, &hash, &["eta", "directions", "max_moment"], &[row])
        }
        "thin_shell" => {
            let p = cfg.p.ok_or_else(|| CliError::Config("thin_shell check requires \"p\"".into()))?;
            let ranks = cfg
                .ranks
                .clone()
                .ok_or_else(|| CliError::Config("thin_shell check requires \"ranks\"".into()))?;
            let ratios = thin_shell_check(&sampler, p, &ranks, cfg.sample_count, &mut rng)
                .map_err(classify)?;
            write_json(
                out,
                "tails",
                cfg.seed,
                &hash,
                &cfg,
                &TailsResult::ThinShell { p, ranks: ranks.clone(), ratios: ratios.clone() },
            )?;
            let rows: Vec<Vec<String>> = ranks
                .iter()
                .zip(&ratios)
                .map(|(k, r)| vec![k.to_string(), fmt_f64(p), fmt_f64(*r)])
                .collect();
            write_csv(out, "tails", cfg.seed, &hash, &["rank_k", "p", "ratio"], &rows)
        }
        other => Err(CliError::Config(format!(
            "unknown check \"{other}\" (expected sr, wr, thin_shell)"
        ))),
    }
}

fn cmd_counterexample(config_path: &Path, seed_flag: Option<u64>, out: &Path) -> Result<(), CliError> {
    let mut cfg: CounterexampleConfig = load_config(config_path)?;
    if let Some(seed) = seed_flag {
        cfg.seed = seed;
    }
    let hash = config_hash(&cfg);
    match cfg.kind.as_str() {
        "aubrun" => {
            let result = counterexample_aubrun(&cfg.sizes, cfg.trials, cfg.seed).map_err(classify)?;
            write_json(out, "counterexample", cfg.seed, &hash, &cfg, &result)?;
            let rows: Vec<Vec<String>> = result
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        fmt_f64(r.mean_error),
                        fmt_f64(r.mean_max_norm_excess),
                        r.bound_violations.to_string(),
                        fmt_f64(r.se_error),
                        fmt_f64(r.se_max_norm_excess),
                    ]
                })
                .collect();
            write_csv(
                out,
                "counterexample",
                cfg.seed,
                &hash,
                &["n", "mean_error", "mean_max_norm_excess", "bound_violations", "se_error", "se_max_norm_excess"],
                &rows,
            )
        }
        "coupon" => {
            let n = cfg.n.ok_or_else(|| CliError::Config("coupon kind requires \"n\"".into()))?;
            let rows = counterexample_coupon(n, &cfg.sizes, cfg.trials, cfg.seed).map_err(classify)?;
            write_json(out, "counterexample", cfg.seed, &hash, &cfg, &rows)?;
            let csv_rows: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.n_samples.to_string(),
                        fmt_f64(r.singular_fraction),
                        fmt_f64(r.coupon_fraction),
                        fmt_f64(r.oracle_full_rank_prob),
                        r.trials.to_string(),
                    ]
                })
                .collect();
            write_csv(
                out,
                "counterexample",
                cfg.seed,
                &hash,
                &["n_samples", "singular_fraction", "coupon_fraction", "oracle_full_rank_prob", "trials"],
                &csv_rows,
            )
        }
        other => Err(CliError::Config(format!("unknown kind \"{other}\" (expected aubrun, coupon)"))),
    }
}

fn cmd_fixedn(config_path: &Path, seed_flag: Option<u64>, out: &Path) -> Result<(), CliError> {
    let mut cfg: FixednConfig = load_config(config_path)?;
    if let Some(seed) = seed_flag {
        cfg.seed = seed;
    }
    let sampler_spec = cfg.sampler.build_spec().map_err(CliError::Config)?;
    let rows = fixed_aspect_check(&sampler_spec, &cfg.y_values, cfg.trials, cfg.seed).map_err(classify)?;
    let hash = config_hash(&cfg);
    write_json(out, "fixedn", cfg.seed, &hash, &cfg, &rows)?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.y),
                r.n_samples.to_string(),
                fmt_f64(r.mean_lambda_min),
                fmt_f64(r.mean_lambda_max),
                r.bound_lower.map(fmt_f64).unwrap_or_default(),
                r.bound_upper.map(fmt_f64).unwrap_or_default(),
                fmt_f64(r.se_lambda_min),
                fmt_f64(r.se_lambda_max),
            ]
        })
        .collect();
    write_csv(
        out,
        "fixedn",
        cfg.seed,
        &hash,
        &["y", "n_samples", "mean_lambda_min", "mean_lambda_max", "bound_lower", "bound_upper", "se_lambda_min", "se_lambda_max"],
        &csv_rows,
    )
}

fn cmd_trace(config_path: &Path, seed_flag: Option<u64>, out: &Path) -> Result<(), CliError> {
    let mut cfg: TraceConfig = load_config(config_path)?;
    if let Some(seed) = seed_flag {
        cfg.seed = seed;
    }
    let table = trace_concentration_check(
        cfg.tail_c,
        cfg.eta,
        cfg.eps,
        &cfg.sample_sizes,
        cfg.trials,
        cfg.seed,
        cfg.pareto_dim,
        cfg.pareto_alpha,
    )
    .map_err(classify)?;
    let hash = config_hash(&cfg);
    write_json(out, "trace", cfg.seed, &hash, &cfg, &table)?;
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n_samples.to_string(),
                fmt_f64(r.mean_abs_dev_scalar),
                fmt_f64(r.mean_abs_dev_pareto_norm),
                fmt_f64(table.threshold),
                fmt_f64(r.se_scalar),
                fmt_f64(r.se_pareto_norm),
            ]
        })
        .collect();
    write_csv(
        out,
        "trace",
        cfg.seed,
        &hash,
        &["n_samples", "mean_abs_dev_scalar", "mean_abs_dev_pareto_norm", "threshold", "se_scalar", "se_pareto_norm"],
        &rows,
    )
}
