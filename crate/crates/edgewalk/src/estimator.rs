//! Sample covariance assembly, spectral-error statistics, and the Monte Carlo
//! experiment drivers: fixed-size estimation runs, minimal-sample-size sweeps,
//! fixed-aspect-ratio edge tables, trace concentration, and the two
//! counterexample studies (norm blow-up and coupon-collector rank failure).
//!
//! Trials are embarrassingly parallel. Every trial owns an RNG stream keyed by
//! `(seed, trial index)` and aggregation runs in trial order, so results are
//! bit-identical for any thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{spd_inv_sqrt, Sampler, SamplerKind, SamplerSpec};
use crate::error::{Error, Result};
use crate::rng::{mix_seed, RngStream};
use crate::stats::{mean_and_se, quantile_sorted, weighted_slope};
use crate::symmat::{eigendecompose, SymMatrix, Vector};

/// Configuration of one Monte Carlo estimation experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sampler: SamplerSpec,
    /// Number of samples N per trial.
    pub n_samples: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_eps: Option<f64>,
}

/// Extra diagnostics for colored (non-isotropic) runs.
#[derive(Debug, Clone, Serialize)]
pub struct ColoredDiagnostics {
    /// Mean of ||Sigma_N - Sigma|| / ||Sigma|| across trials.
    pub mean_relative_target_error: f64,
    pub se_relative_target_error: f64,
    /// Trials where ||Sigma_N - Sigma|| exceeded ||Sigma|| times the whitened
    /// error beyond 1e-9 slack (submultiplicativity; expected 0).
    pub submultiplicativity_violations: usize,
}

/// Monte Carlo aggregates of an estimation experiment. For colored runs the
/// spectral statistics refer to the whitened matrix Sigma^(-1/2) Sigma_N
/// Sigma^(-1/2), whose target is the identity.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub mean_spectral_error: f64,
    pub se_spectral_error: f64,
    pub mean_lambda_min: f64,
    pub se_lambda_min: f64,
    pub mean_lambda_max: f64,
    pub se_lambda_max: f64,
    pub mean_trace_gap: f64,
    pub se_trace_gap: f64,
    /// 5%, 50%, 95% quantiles of the per-trial spectral error.
    pub error_quantiles: (f64, f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fraction_within_target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub colored: Option<ColoredDiagnostics>,
}

/// Sigma_N = (1/N) sum_i X_i X_iᵀ, symmetric PSD by construction.
pub fn sample_covariance(samples: &[Vector]) -> Result<SymMatrix> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Empty("sample_covariance needs at least one sample".into()))?;
    let n = first.dim();
    for (i, s) in samples.iter().enumerate() {
        if s.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "sample {i} has dimension {}, expected {n}",
                s.dim()
            )));
        }
    }
    let inv_count = 1.0 / samples.len() as f64;
    let mut acc = vec![0.0; n * n];
    for s in samples {
        let xs = s.as_slice();
        for i in 0..n {
            let xi = xs[i];
            if xi == 0.0 {
                continue;
            }
            let row = &mut acc[i * n..(i + 1) * n];
            for j in i..n {
                row[j] += xi * xs[j];
            }
        }
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = acc[i * n + j] * inv_count;
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    SymMatrix::from_rows(n, data)
}

/// Operator-norm distance max |lambda(S - target)|.
pub fn spectral_error(s: &SymMatrix, target: &SymMatrix) -> Result<f64> {
    let diff = s.sub(target)?;
    let spec = eigendecompose(&diff)?;
    Ok(spec.lambda_max().abs().max(spec.lambda_min().abs()))
}

/// S A S for symmetric S and A, symmetrized exactly against rounding.
fn conjugate(a: &SymMatrix, s: &SymMatrix) -> Result<SymMatrix> {
    let n = a.dim();
    if s.dim() != n {
        return Err(Error::DimensionMismatch("conjugation dimensions differ".into()));
    }
    // tmp = A * S
    let mut tmp = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a.get(i, k);
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                tmp[i * n + j] += aik * s.get(k, j);
            }
        }
    }
    // out = S * tmp, symmetrized.
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let sik = s.get(i, k);
            if sik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += sik * tmp[k * n + j];
            }
        }
    }
    SymMatrix::from_fn(n, |i, j| 0.5 * (out[i * n + j] + out[j * n + i]))
}

struct TrialStat {
    spectral_error: f64,
    lambda_min: f64,
    lambda_max: f64,
    trace_gap: f64,
    relative_target_error: Option<f64>,
    submultiplicativity_violation: bool,
}

/// Run one Monte Carlo estimation experiment. Deterministic in
/// `(config, seed)` regardless of thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if config.n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
    }
    let sampler = Sampler::new(config.sampler.clone())?;
    let colored_setup = match &config.sampler.kind {
        SamplerKind::Colored { sigma, .. } => {
            let inv_sqrt = spd_inv_sqrt(sigma)?;
            let sigma_spec = eigendecompose(sigma)?;
            let sigma_norm = sigma_spec.lambda_max().abs().max(sigma_spec.lambda_min().abs());
            Some((sigma.clone(), inv_sqrt, sigma_norm))
        }
        _ => None,
    };

    let stats: Result<Vec<TrialStat>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            run_trial(&sampler, config, colored_setup.as_ref(), trial).map_err(|e| Error::Trial {
                trial,
                source: Box::new(e),
            })
        })
        .collect();
    let stats = stats?;

    let errors: Vec<f64> = stats.iter().map(|t| t.spectral_error).collect();
    let (mean_err, se_err) = mean_and_se(&errors);
    let mins: Vec<f64> = stats.iter().map(|t| t.lambda_min).collect();
    let (mean_min, se_min) = mean_and_se(&mins);
    let maxs: Vec<f64> = stats.iter().map(|t| t.lambda_max).collect();
    let (mean_max, se_max) = mean_and_se(&maxs);
    let gaps: Vec<f64> = stats.iter().map(|t| t.trace_gap).collect();
    let (mean_gap, se_gap) = mean_and_se(&gaps);

    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    let quantiles = (
        quantile_sorted(&sorted, 0.05),
        quantile_sorted(&sorted, 0.50),
        quantile_sorted(&sorted, 0.95),
    );

    let fraction_within_target = config.target_eps.map(|eps| {
        errors.iter().filter(|e| **e <= eps).count() as f64 / errors.len() as f64
    });

    let colored = colored_setup.map(|_| {
        let rels: Vec<f64> = stats
            .iter()
            .map(|t| t.relative_target_error.expect("colored trials record the target error"))
            .collect();
        let (mean_rel, se_rel) = mean_and_se(&rels);
        ColoredDiagnostics {
            mean_relative_target_error: mean_rel,
            se_relative_target_error: se_rel,
            submultiplicativity_violations: stats
                .iter()
                .filter(|t| t.submultiplicativity_violation)
                .count(),
        }
    });

    Ok(ExperimentResult {
        config: config.clone(),
        mean_spectral_error: mean_err,
        se_spectral_error: se_err,
        mean_lambda_min: mean_min,
        se_lambda_min: se_min,
        mean_lambda_max: mean_max,
        se_lambda_max: se_max,
        mean_trace_gap: mean_gap,
        se_trace_gap: se_gap,
        error_quantiles: quantiles,
        fraction_within_target,
        colored,
    })
}

fn run_trial(
    sampler: &Sampler,
    config: &ExperimentConfig,
    colored: Option<&(SymMatrix, SymMatrix, f64)>,
    trial: usize,
) -> Result<TrialStat> {
    let mut rng = RngStream::new(config.seed, trial as u64);
    let samples: Vec<Vector> = (0..config.n_samples).map(|_| sampler.draw(&mut rng)).collect();
    let cov = sample_covariance(&samples)?;
    let n = cov.dim() as f64;

    let (work, relative_target_error, submultiplicativity_violation) = match colored {
        None => (cov, None, false),
        Some((sigma, inv_sqrt, sigma_norm)) => {
            let whitened = conjugate(&cov, inv_sqrt)?;
            let target_error = spectral_error(&cov, sigma)?;
            let whitened_spec = eigendecompose(&whitened)?;
            let whitened_error = (whitened_spec.lambda_max() - 1.0)
                .max(1.0 - whitened_spec.lambda_min())
                .max(0.0);
            let bound = sigma_norm * whitened_error;
            let violated = target_error > bound + 1e-9 * (1.0 + bound.abs());
            (whitened, Some(target_error / sigma_norm), violated)
        }
    };

    let spec = eigendecompose(&work)?;
    let lambda_min = spec.lambda_min();
    let lambda_max = spec.lambda_max();
    let spectral_error = (lambda_max - 1.0).max(1.0 - lambda_min).max(0.0);
    let trace_gap = (work.trace() / n - 1.0).abs();

    Ok(TrialStat {
        spectral_error,
        lambda_min,
        lambda_max,
        trace_gap,
        relative_target_error,
        submultiplicativity_violation,
    })
}

/// One point of a minimal-sample-size sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub n: usize,
    /// Minimal N with Monte Carlo mean spectral error <= eps, to 5% resolution;
    /// equals the search cap when censored.
    pub n_min: usize,
    pub censored: bool,
    /// Mean error measured at `n_min`.
    pub mean_error: f64,
}

const SWEEP_CAP: usize = 1_000_000;
const SWEEP_RESOLUTION: f64 = 1.05;

/// For each dimension, binary-search the minimal sample count whose mean
/// spectral error is below eps. Resolution is 5% in N; the search caps at
/// 1e6 samples and reports censoring.
pub fn scaling_sweep(
    kind: &SamplerKind,
    eps: f64,
    n_values: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0,1), got {eps}")));
    }
    if matches!(kind, SamplerKind::Colored { .. }) {
        return Err(Error::InvalidParameter(
            "scaling_sweep needs a dimension-parametric sampler, not colored".into(),
        ));
    }
    let mut out = Vec::with_capacity(n_values.len());
    for &n in n_values {
        if n == 0 {
            return Err(Error::InvalidParameter("dimensions must be >= 1".into()));
        }
        let mean_error_at = |n_samples: usize| -> Result<f64> {
            let config = ExperimentConfig {
                sampler: SamplerSpec { kind: kind.clone(), dim: n, known_params: None },
                n_samples,
                trials,
                seed: mix_seed(seed, &[n as u64, n_samples as u64]),
                target_eps: None,
            };
            Ok(run_experiment(&config)?.mean_spectral_error)
        };

        let mut probe = n.max(1);
        let mut err_at_probe = mean_error_at(probe)?;
        if err_at_probe <= eps {
            out.push(SweepPoint { n, n_min: probe, censored: false, mean_error: err_at_probe });
            continue;
        }
        let (mut lo, mut hi);
        loop {
            let next = probe.saturating_mul(2);
            if next > SWEEP_CAP {
                break;
            }
            let err = mean_error_at(next)?;
            if err <= eps {
                lo = probe;
                hi = next;
                err_at_probe = err;
                let point = refine_sweep(&mean_error_at, &mut lo, &mut hi, eps, err_at_probe)?;
                out.push(SweepPoint { n, n_min: point.0, censored: false, mean_error: point.1 });
                break;
            }
            probe = next;
        }
        if out.last().map(|p| p.n) != Some(n) {
            out.push(SweepPoint { n, n_min: SWEEP_CAP, censored: true, mean_error: err_at_probe });
        }
    }
    Ok(out)
}

fn refine_sweep(
    mean_error_at: &dyn Fn(usize) -> Result<f64>,
    lo: &mut usize,
    hi: &mut usize,
    eps: f64,
    mut err_at_hi: f64,
) -> Result<(usize, f64)> {
    while (*hi as f64) > (*lo as f64) * SWEEP_RESOLUTION && *hi > *lo + 1 {
        let mid = (((*lo as f64) * (*hi as f64)).sqrt().round() as usize).clamp(*lo + 1, *hi - 1);
        let err = mean_error_at(mid)?;
        if err <= eps {
            *hi = mid;
            err_at_hi = err;
        } else {
            *lo = mid;
        }
    }
    Ok((*hi, err_at_hi))
}

/// One row of the fixed-aspect-ratio edge table.
#[derive(Debug, Clone, Serialize)]
pub struct FixedNRow {
    pub y: f64,
    pub n_samples: usize,
    pub mean_lambda_min: f64,
    pub se_lambda_min: f64,
    pub mean_lambda_max: f64,
    pub se_lambda_max: f64,
    /// 1 - C1 y^c when (C, eta) is known for the sampler.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_lower: Option<f64>,
    /// 1 + C1 (y + y^c) when (C, eta) is known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_upper: Option<f64>,
}

/// Empirical extreme eigenvalues at aspect ratios y = n/N, next to the
/// closed-form bounds evaluated from the sampler's known (C, eta).
pub fn fixed_aspect_check(
    sampler_spec: &SamplerSpec,
    y_values: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<FixedNRow>> {
    let n = sampler_spec.dim;
    let bounds = sampler_spec.known_params.map(|(c, eta)| {
        (
            crate::shifts::edge_bound_constant(c, eta),
            crate::shifts::edge_bound_exponent(eta),
        )
    });
    let mut rows = Vec::with_capacity(y_values.len());
    for &y in y_values {
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::InvalidParameter(format!("aspect ratio must be positive, got {y}")));
        }
        let n_samples = ((n as f64 / y).round() as usize).max(1);
        let config = ExperimentConfig {
            sampler: sampler_spec.clone(),
            n_samples,
            trials,
            seed: mix_seed(seed, &[y.to_bits(), n_samples as u64]),
            target_eps: None,
        };
        let result = run_experiment(&config)?;
        let (bound_lower, bound_upper) = match bounds {
            Some((c1, c_exp)) => (
                Some(1.0 - c1 * y.powf(c_exp)),
                Some(1.0 + c1 * (y + y.powf(c_exp))),
            ),
            None => (None, None),
        };
        rows.push(FixedNRow {
            y,
            n_samples,
            mean_lambda_min: result.mean_lambda_min,
            se_lambda_min: result.se_lambda_min,
            mean_lambda_max: result.mean_lambda_max,
            se_lambda_max: result.se_lambda_max,
            bound_lower,
            bound_upper,
        });
    }
    Ok(rows)
}

/// One row of the trace-concentration table.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub n_samples: usize,
    /// E |(1/N) sum Z_i - 1| for the direct heavy-tailed scalar law.
    pub mean_abs_dev_scalar: f64,
    pub se_scalar: f64,
    /// Same functional for Z = ||X||²/n with X a Pareto product vector.
    pub mean_abs_dev_pareto_norm: f64,
    pub se_pareto_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceConcentration {
    /// Sample-size threshold (2C)^(2/eta) (1+1/eta)^(2/eta) / (eps/2)^(2+2/eta).
    pub threshold: f64,
    pub rows: Vec<TraceRow>,
}

/// Mean absolute deviation of the sample mean from 1, over `trials`
/// replicates of `n_samples` draws each.
fn mean_abs_deviation<F>(draw: F, n_samples: usize, trials: usize, seed: u64) -> (f64, f64)
where
    F: Fn(&mut RngStream) -> f64 + Sync,
{
    let devs: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = RngStream::new(seed, trial as u64);
            let mut sum = 0.0;
            for _ in 0..n_samples {
                sum += draw(&mut rng);
            }
            (sum / n_samples as f64 - 1.0).abs()
        })
        .collect();
    mean_and_se(&devs)
}

/// Scalar law with unit mean and tail P(|Z| > t) <= C t^(-1-eta): an atom at
/// 1 plus a symmetric Pareto excursion of index 1 + eta, mixed with weight
/// q = 2C / (2^(1+eta) + 1). Valid for C >= 1.
pub struct HeavyTailScalar {
    q: f64,
    inv_index: f64,
}

impl HeavyTailScalar {
    pub fn new(c: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
        }
        if !(c >= 1.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "the scalar heavy-tail law needs C >= 1 (P(|Z| > t) <= 1 near t = 1), got {c}"
            )));
        }
        let q = (2.0 * c / (2.0f64.powf(1.0 + eta) + 1.0)).min(1.0);
        Ok(HeavyTailScalar { q, inv_index: 1.0 / (1.0 + eta) })
    }

    pub fn draw(&self, rng: &mut RngStream) -> f64 {
        if rng.random::<f64>() < self.q {
            let u = 1.0 - rng.random::<f64>();
            let magnitude = u.powf(-self.inv_index);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            1.0 + sign * magnitude
        } else {
            1.0
        }
    }

    /// Exact tail probability P(|Z| > t), for validating the construction.
    pub fn tail_prob(&self, t: f64) -> f64 {
        let survival = |w: f64| -> f64 {
            if w <= 0.0 {
                1.0
            } else if w <= 1.0 {
                self.q
            } else {
                self.q * w.powf(-1.0 / self.inv_index)
            }
        };
        if t < 1.0 {
            // |1 + W| > t unless W lands in [-1-t, -1+t]; bound by total mass.
            1.0 - 0.5 * (survival(t - 1.0).max(0.0) - survival(t + 1.0))
        } else {
            0.5 * (survival(t - 1.0) + survival(t + 1.0))
        }
    }
}

/// Empirical E |(1/N) sum Z_i - 1| per sample size, for the direct scalar law
/// and for the Pareto-product norm functional Z = ||X||²/n.
#[allow(clippy::too_many_arguments)]
pub fn trace_concentration_check(
    tail_c: f64,
    eta: f64,
    eps: f64,
    sample_sizes: &[usize],
    trials: usize,
    seed: u64,
    pareto_dim: usize,
    pareto_alpha: f64,
) -> Result<TraceConcentration> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0,1), got {eps}")));
    }
    let scalar = HeavyTailScalar::new(tail_c, eta)?;
    let pareto = Sampler::new(SamplerSpec {
        kind: SamplerKind::ParetoProduct { alpha: pareto_alpha },
        dim: pareto_dim,
        known_params: None,
    })?;
    let threshold = (2.0 * tail_c).powf(2.0 / eta) * (1.0 + 1.0 / eta).powf(2.0 / eta)
        / (eps / 2.0).powf(2.0 + 2.0 / eta);

    let mut rows = Vec::with_capacity(sample_sizes.len());
    for &n_samples in sample_sizes {
        if n_samples == 0 {
            return Err(Error::InvalidParameter("sample sizes must be >= 1".into()));
        }
        let (mean_scalar, se_scalar) = mean_abs_deviation(
            |rng| scalar.draw(rng),
            n_samples,
            trials,
            mix_seed(seed, &[n_samples as u64, 1]),
        );
        let dim = pareto.dim() as f64;
        let (mean_pareto, se_pareto) = mean_abs_deviation(
            |rng| pareto.draw(rng).norm_sq() / dim,
            n_samples,
            trials,
            mix_seed(seed, &[n_samples as u64, 2]),
        );
        rows.push(TraceRow {
            n_samples,
            mean_abs_dev_scalar: mean_scalar,
            se_scalar,
            mean_abs_dev_pareto_norm: mean_pareto,
            se_pareto_norm: se_pareto,
        });
    }
    Ok(TraceConcentration { threshold, rows })
}

/// One row of the norm-blow-up counterexample table (square case n = N).
#[derive(Debug, Clone, Serialize)]
pub struct NormBlowupRow {
    pub n: usize,
    pub mean_error: f64,
    pub se_error: f64,
    /// Mean of (1/N) max_i ||X_i||² - 1.
    pub mean_max_norm_excess: f64,
    pub se_max_norm_excess: f64,
    /// Trials violating the per-trial bound error >= excess (expected 0).
    pub bound_violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormBlowupResult {
    pub rows: Vec<NormBlowupRow>,
    /// Weighted regression slope of mean error on ln N, with its standard
    /// error; a positive slope shows the logarithmic blow-up. Needs at least
    /// two sizes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_se: Option<f64>,
    /// Same regression for the max-norm excess term, which must grow too.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excess_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excess_slope_se: Option<f64>,
}

/// Square-case (n = N) spectral error of the sphere-times-Gaussian sampler,
/// whose norm has dimension-free tails: the error grows like log N.
pub fn counterexample_aubrun(
    sizes: &[usize],
    trials: usize,
    seed: u64,
) -> Result<NormBlowupResult> {
    if sizes.is_empty() {
        return Err(Error::Empty("need at least one size".into()));
    }
    if sizes.iter().any(|&s| s < 4) {
        return Err(Error::InvalidParameter("sizes must be >= 4".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let sampler = Sampler::new(SamplerSpec {
            kind: SamplerKind::Aubrun,
            dim: n,
            known_params: None,
        })?;
        let per_trial: Result<Vec<(f64, f64, bool)>> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = RngStream::new(mix_seed(seed, &[n as u64]), trial as u64);
                let samples: Vec<Vector> = (0..n).map(|_| sampler.draw(&mut rng)).collect();
                let max_norm = samples.iter().map(Vector::norm_sq).fold(0.0f64, f64::max);
                let excess = max_norm / n as f64 - 1.0;
                let cov = sample_covariance(&samples)?;
                let spec = eigendecompose(&cov)?;
                let error = (spec.lambda_max() - 1.0).max(1.0 - spec.lambda_min()).max(0.0);
                let violated = error < excess - 1e-9 * (1.0 + excess.abs());
                Ok((error, excess, violated))
            })
            .collect();
        let per_trial = per_trial?;
        let errors: Vec<f64> = per_trial.iter().map(|t| t.0).collect();
        let excesses: Vec<f64> = per_trial.iter().map(|t| t.1).collect();
        let (mean_error, se_error) = mean_and_se(&errors);
        let (mean_excess, se_excess) = mean_and_se(&excesses);
        rows.push(NormBlowupRow {
            n,
            mean_error,
            se_error,
            mean_max_norm_excess: mean_excess,
            se_max_norm_excess: se_excess,
            bound_violations: per_trial.iter().filter(|t| t.2).count(),
        });
    }
    let (slope, slope_se, excess_slope, excess_slope_se) = if rows.len() >= 2 {
        let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.mean_error).collect();
        let ses: Vec<f64> = rows.iter().map(|r| r.se_error).collect();
        let (b, se) = weighted_slope(&xs, &ys, &ses);
        let ys: Vec<f64> = rows.iter().map(|r| r.mean_max_norm_excess).collect();
        let ses: Vec<f64> = rows.iter().map(|r| r.se_max_norm_excess).collect();
        let (be, see) = weighted_slope(&xs, &ys, &ses);
        (Some(b), Some(se), Some(be), Some(see))
    } else {
        (None, None, None, None)
    };
    Ok(NormBlowupResult { rows, slope, slope_se, excess_slope, excess_slope_se })
}

/// One row of the coupon-collector counterexample table.
#[derive(Debug, Clone, Serialize)]
pub struct CouponRow {
    pub n_samples: usize,
    /// Fraction of trials with a singular sample covariance (smallest
    /// eigenvalue at numerical zero).
    pub singular_fraction: f64,
    /// Fraction of trials missing at least one basis direction; equals the
    /// spectral fraction by the rank law.
    pub coupon_fraction: f64,
    /// exp(-n exp(-N/n)), the coupon-collector approximation of full rank.
    pub oracle_full_rank_prob: f64,
    pub trials: usize,
}

/// Probability that the basis-coupon sample covariance stays singular, per
/// sample size, against the coupon-collector oracle.
pub fn counterexample_coupon(
    n: usize,
    sample_sizes: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<CouponRow>> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    let sampler = Sampler::new(SamplerSpec {
        kind: SamplerKind::BasisCoupon,
        dim: n,
        known_params: None,
    })?;
    let mut rows = Vec::with_capacity(sample_sizes.len());
    for &n_samples in sample_sizes {
        if n_samples == 0 {
            return Err(Error::InvalidParameter("sample sizes must be >= 1".into()));
        }
        let per_trial: Result<Vec<(bool, bool)>> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = RngStream::new(mix_seed(seed, &[n_samples as u64]), trial as u64);
                let samples: Vec<Vector> = (0..n_samples).map(|_| sampler.draw(&mut rng)).collect();
                let mut seen = vec![false; n];
                for x in &samples {
                    if let Some(idx) = x.as_slice().iter().position(|v| *v != 0.0) {
                        seen[idx] = true;
                    }
                }
                let coupon_singular = !seen.iter().all(|s| *s);
                let cov = sample_covariance(&samples)?;
                let spec = eigendecompose(&cov)?;
                let spectral_singular = spec.lambda_min() < 1e-8;
                Ok((spectral_singular, coupon_singular))
            })
            .collect();
        let per_trial = per_trial?;
        let singular = per_trial.iter().filter(|t| t.0).count() as f64 / trials as f64;
        let coupon = per_trial.iter().filter(|t| t.1).count() as f64 / trials as f64;
        rows.push(CouponRow {
            n_samples,
            singular_fraction: singular,
            coupon_fraction: coupon,
            oracle_full_rank_prob: (-(n as f64) * (-(n_samples as f64) / n as f64).exp()).exp(),
            trials,
        });
    }
    Ok(rows)
}
