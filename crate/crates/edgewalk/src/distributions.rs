//! Samplers for isotropic distributions and empirical estimators of their
//! regularity: projected tail exceedance, directional moments, and thin-shell
//! deviation moments.
//!
//! Every sampler is normalized so the population covariance is exactly the
//! identity: Gaussian is standard; Cube coordinates are uniform on
//! [-sqrt(3), sqrt(3)]; Sphere points have radius sqrt(n); Pareto coordinates
//! are symmetrized and variance-normalized; the coupon sampler picks
//! +/- sqrt(n) e_k; Colored wraps a base sampler with a sigma^(1/2) factor.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::symmat::{eigendecompose, SymMatrix, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerKind {
    Gaussian,
    Cube,
    Sphere,
    ParetoProduct { alpha: f64 },
    Aubrun,
    BasisCoupon,
    Colored { base: Box<SamplerKind>, sigma: SymMatrix },
}

impl SamplerKind {
    pub fn name(&self) -> &'static str {
        match self {
            SamplerKind::Gaussian => "gaussian",
            SamplerKind::Cube => "cube",
            SamplerKind::Sphere => "sphere",
            SamplerKind::ParetoProduct { .. } => "pareto_product",
            SamplerKind::Aubrun => "aubrun",
            SamplerKind::BasisCoupon => "basis_coupon",
            SamplerKind::Colored { .. } => "colored",
        }
    }

    /// Product-type distributions admit the thin-shell check.
    fn is_product(&self) -> bool {
        matches!(
            self,
            SamplerKind::Gaussian | SamplerKind::Cube | SamplerKind::ParetoProduct { .. }
        )
    }
}

/// A named isotropic distribution in a fixed dimension, with its regularity
/// parameters (C, eta) where analytically known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_params: Option<(f64, f64)>,
}

/// Validated sampler ready to draw. Stateless given an RNG stream.
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: SamplerSpec,
    pareto_scale: f64,
    sqrt_sigma: Option<SymMatrix>,
    base: Option<Box<Sampler>>,
}

impl Sampler {
    pub fn new(spec: SamplerSpec) -> Result<Self> {
        if spec.dim == 0 {
            return Err(Error::InvalidParameter("sampler dimension must be >= 1".into()));
        }
        let mut pareto_scale = 1.0;
        let mut sqrt_sigma = None;
        let mut base = None;
        match &spec.kind {
            SamplerKind::ParetoProduct { alpha } => {
                if !(*alpha > 2.0 && alpha.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "pareto_product needs alpha > 2 for finite variance, got {alpha}"
                    )));
                }
                pareto_scale = 1.0 / (alpha / (alpha - 2.0)).sqrt();
            }
            SamplerKind::Colored { base: base_kind, sigma } => {
                if sigma.dim() != spec.dim {
                    return Err(Error::DimensionMismatch(format!(
                        "sigma is {}x{} but sampler dimension is {}",
                        sigma.dim(),
                        sigma.dim(),
                        spec.dim
                    )));
                }
                let sigma_spec = eigendecompose(sigma)?;
                if !(sigma_spec.lambda_min() > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "sigma must be positive definite, smallest eigenvalue {}",
                        sigma_spec.lambda_min()
                    )));
                }
                sqrt_sigma = Some(spd_power(&sigma_spec, 0.5)?);
                base = Some(Box::new(Sampler::new(SamplerSpec {
                    kind: (**base_kind).clone(),
                    dim: spec.dim,
                    known_params: None,
                })?));
            }
            _ => {}
        }
        Ok(Sampler { spec, pareto_scale, sqrt_sigma, base })
    }

    pub fn spec(&self) -> &SamplerSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn known_params(&self) -> Option<(f64, f64)> {
        self.spec.known_params
    }

    /// Draw one sample.
    pub fn draw(&self, rng: &mut RngStream) -> Vector {
        let n = self.spec.dim;
        let coords = match &self.spec.kind {
            SamplerKind::Gaussian => {
                (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
            }
            SamplerKind::Cube => {
                let half_width = 3.0f64.sqrt();
                (0..n)
                    .map(|_| (2.0 * rng.random::<f64>() - 1.0) * half_width)
                    .collect()
            }
            SamplerKind::Sphere => sphere_point(n, rng),
            SamplerKind::ParetoProduct { alpha } => (0..n)
                .map(|_| {
                    let u = 1.0 - rng.random::<f64>(); // in (0, 1]
                    let magnitude = u.powf(-1.0 / alpha);
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    sign * magnitude * self.pareto_scale
                })
                .collect(),
            SamplerKind::Aubrun => {
                let xi: f64 = rng.sample(StandardNormal);
                let mut z = sphere_point(n, rng);
                for c in &mut z {
                    *c *= xi;
                }
                z
            }
            SamplerKind::BasisCoupon => {
                let k = rng.random_range(0..n);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let mut z = vec![0.0; n];
                z[k] = sign * (n as f64).sqrt();
                z
            }
            SamplerKind::Colored { .. } => {
                let base = self.base.as_ref().expect("colored sampler has a base");
                let sqrt_sigma = self.sqrt_sigma.as_ref().expect("colored sampler has sigma^(1/2)");
                let z = base.draw(rng);
                return sqrt_sigma.matvec(&z).expect("dimensions agree by construction");
            }
        };
        Vector::new(coords).expect("samplers produce finite coordinates")
    }
}

fn sphere_point(n: usize, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm_sq: f64 = g.iter().map(|v| v * v).sum();
        if norm_sq > 0.0 {
            let scale = (n as f64 / norm_sq).sqrt();
            return g.into_iter().map(|v| v * scale).collect();
        }
    }
}

/// sigma^power from an SPD eigendecomposition, symmetric by construction.
fn spd_power(spec: &crate::symmat::SymmetricSpectrum, power: f64) -> Result<SymMatrix> {
    let n = spec.dim();
    let powered: Vec<f64> = spec.eigenvalues().iter().map(|l| l.powf(power)).collect();
    SymMatrix::from_fn(n, |i, j| {
        (0..n)
            .map(|k| powered[k] * spec.vector_component(i, k) * spec.vector_component(j, k))
            .sum()
    })
}

/// Matrix square root of an SPD matrix.
pub fn spd_sqrt(sigma: &SymMatrix) -> Result<SymMatrix> {
    let spec = eigendecompose(sigma)?;
    if !(spec.lambda_min() > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "matrix must be positive definite, smallest eigenvalue {}",
            spec.lambda_min()
        )));
    }
    spd_power(&spec, 0.5)
}

/// Inverse matrix square root of an SPD matrix.
pub fn spd_inv_sqrt(sigma: &SymMatrix) -> Result<SymMatrix> {
    let spec = eigendecompose(sigma)?;
    if !(spec.lambda_min() > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "matrix must be positive definite, smallest eigenvalue {}",
            spec.lambda_min()
        )));
    }
    spd_power(&spec, -0.5)
}

/// Orthonormal frame spanning a rank-k subspace; the associated projection is
/// P = Q Qᵀ and ||P x||² is evaluated without materializing P.
#[derive(Debug, Clone)]
pub struct Projection {
    n: usize,
    k: usize,
    /// Row-major n x k, orthonormal columns.
    cols: Vec<f64>,
}

impl Projection {
    /// Haar-distributed rank-k frame: a standard Gaussian n x k array pushed
    /// through Gram-Schmidt with one re-orthogonalization pass.
    pub fn haar(n: usize, k: usize, rng: &mut RngStream) -> Result<Projection> {
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!(
                "projection rank must satisfy 1 <= k <= n, got k = {k}, n = {n}"
            )));
        }
        let mut cols = vec![0.0; n * k];
        for j in 0..k {
            loop {
                for i in 0..n {
                    cols[i * k + j] = rng.sample::<f64, _>(StandardNormal);
                }
                // Two orthogonalization passes keep the frame orthonormal to
                // working precision even for nearly dependent draws.
                for _ in 0..2 {
                    for prev in 0..j {
                        let dot: f64 = (0..n).map(|i| cols[i * k + j] * cols[i * k + prev]).sum();
                        for i in 0..n {
                            cols[i * k + j] -= dot * cols[i * k + prev];
                        }
                    }
                }
                let norm_sq: f64 = (0..n).map(|i| cols[i * k + j] * cols[i * k + j]).sum();
                if norm_sq.sqrt() > 1e-8 {
                    let inv = 1.0 / norm_sq.sqrt();
                    for i in 0..n {
                        cols[i * k + j] *= inv;
                    }
                    break;
                }
            }
        }
        Ok(Projection { n, k, cols })
    }

    /// Projection onto the span of the listed coordinate directions.
    pub fn coordinates(n: usize, indices: &[usize]) -> Result<Projection> {
        if indices.is_empty() || indices.len() > n {
            return Err(Error::InvalidParameter("need 1 <= #indices <= n coordinates".into()));
        }
        let k = indices.len();
        let mut cols = vec![0.0; n * k];
        for (j, &idx) in indices.iter().enumerate() {
            if idx >= n {
                return Err(Error::InvalidParameter(format!("coordinate index {idx} out of range")));
            }
            cols[idx * k + j] = 1.0;
        }
        Ok(Projection { n, k, cols })
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// ||P x||² = sum_j <q_j, x>².
    pub fn projected_norm_sq(&self, x: &Vector) -> f64 {
        let mut acc = vec![0.0; self.k];
        for (&xi, row) in x.as_slice().iter().zip(self.cols.chunks_exact(self.k)) {
            if xi == 0.0 {
                continue;
            }
            for (a, q) in acc.iter_mut().zip(row) {
                *a += xi * q;
            }
        }
        acc.iter().map(|a| a * a).sum()
    }
}

/// Empirical exceedance probabilities of ||P X||² over a threshold grid,
/// with a power-law fit of the tail.
#[derive(Debug, Clone, Serialize)]
pub struct TailEstimate {
    pub rank_k: usize,
    pub thresholds: Vec<f64>,
    pub empirical_probs: Vec<f64>,
    pub sample_count: usize,
    pub fit: TailFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TailFit {
    /// Least-squares fit of log P vs log t over thresholds above the rank.
    Fitted { c: f64, eta: f64, points_used: usize },
    /// All exceedance counts above the rank were zero: tail below resolution.
    BelowResolution,
}

/// Number of fresh Haar projections drawn across the sample budget.
const TAIL_BATCHES: usize = 16;

/// Estimate the projected-tail regularity of a sampler at projection rank k.
/// Draws a fresh Haar rank-k projection per batch of samples and fits
/// log P(||PX||² > t) against log t on thresholds t > k.
pub fn estimate_sr_tail(
    sampler: &Sampler,
    rank_k: usize,
    sample_count: usize,
    thresholds: &[f64],
    rng: &mut RngStream,
) -> Result<TailEstimate> {
    let n = sampler.dim();
    if rank_k == 0 || rank_k > n {
        return Err(Error::InvalidParameter(format!(
            "rank must satisfy 1 <= k <= n, got k = {rank_k}, n = {n}"
        )));
    }
    if sample_count == 0 {
        return Err(Error::InvalidParameter("sample_count must be >= 1".into()));
    }
    if thresholds.is_empty() {
        return Err(Error::Empty("thresholds must be nonempty".into()));
    }
    if thresholds.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidParameter("thresholds must be finite and positive".into()));
    }
    let mut grid = thresholds.to_vec();
    grid.sort_by(f64::total_cmp);

    let batches = TAIL_BATCHES.min(sample_count);
    let base = sample_count / batches;
    let extra = sample_count % batches;
    let mut counts = vec![0usize; grid.len()];
    for b in 0..batches {
        let batch_size = base + usize::from(b < extra);
        let proj = Projection::haar(n, rank_k, rng)?;
        for _ in 0..batch_size {
            let x = sampler.draw(rng);
            let v = proj.projected_norm_sq(&x);
            for (count, t) in counts.iter_mut().zip(&grid) {
                if v > *t {
                    *count += 1;
                }
            }
        }
    }
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / sample_count as f64).collect();

    // Fit region: positive exceedance above the rank (where the tail bound
    // is informative). The fitted level plays both constant roles.
    let mut points: Vec<(f64, f64)> = grid
        .iter()
        .zip(&probs)
        .filter(|(t, p)| **p > 0.0 && **t > rank_k as f64)
        .map(|(t, p)| (t.ln(), p.ln()))
        .collect();
    if points.len() < 2 {
        points = grid
            .iter()
            .zip(&probs)
            .filter(|(_, p)| **p > 0.0)
            .map(|(t, p)| (t.ln(), p.ln()))
            .collect();
    }
    let fit = if points.len() < 2 {
        TailFit::BelowResolution
    } else {
        let (slope, intercept) = least_squares(&points);
        TailFit::Fitted {
            c: intercept.exp(),
            eta: -slope - 1.0,
            points_used: points.len(),
        }
    };

    Ok(TailEstimate {
        rank_k,
        thresholds: grid,
        empirical_probs: probs,
        sample_count,
        fit,
    })
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|(x, _)| x).sum::<f64>() / n;
    let my = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Empirical sup of E|<X, x>|^(2+eta) over the n coordinate directions plus
/// `direction_count` Haar-random unit directions.
pub fn estimate_wr_moment(
    sampler: &Sampler,
    eta: f64,
    direction_count: usize,
    sample_count: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    if sample_count == 0 {
        return Err(Error::InvalidParameter("sample_count must be >= 1".into()));
    }
    let n = sampler.dim();
    let mut directions: Vec<Vector> = Vec::with_capacity(direction_count);
    for _ in 0..direction_count {
        let proj = Projection::haar(n, 1, rng)?;
        directions.push(Vector::new((0..n).map(|i| proj.cols[i]).collect())?);
    }
    let p = 2.0 + eta;
    let mut sums = vec![0.0; n + directions.len()];
    for _ in 0..sample_count {
        let x = sampler.draw(rng);
        let xs = x.as_slice();
        for (s, &xi) in sums.iter_mut().zip(xs) {
            *s += xi.abs().powf(p);
        }
        for (s, d) in sums[n..].iter_mut().zip(&directions) {
            *s += d.dot(&x).abs().powf(p);
        }
    }
    Ok(sums.iter().fold(0.0f64, |m, s| m.max(*s)) / sample_count as f64)
}

/// E |(||P X||² - k)|^p for a fixed projection.
pub fn projected_deviation_moment(
    sampler: &Sampler,
    proj: &Projection,
    p: f64,
    sample_count: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    if sample_count == 0 {
        return Err(Error::InvalidParameter("sample_count must be >= 1".into()));
    }
    let k = proj.rank() as f64;
    let mut sum = 0.0;
    for _ in 0..sample_count {
        let x = sampler.draw(rng);
        sum += (proj.projected_norm_sq(&x) - k).abs().powf(p);
    }
    Ok(sum / sample_count as f64)
}

/// Thin-shell ratios E|(||P X||² - k)|^p / k^(p/2) for Haar projections of the
/// given ranks. Only product-type samplers qualify, and the Pareto sampler
/// needs alpha > 2p for the moment to exist.
pub fn thin_shell_check(
    sampler: &Sampler,
    p: f64,
    ranks: &[usize],
    sample_count: usize,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must be >= 2, got {p}")));
    }
    if !sampler.spec().kind.is_product() {
        return Err(Error::Precondition(format!(
            "thin-shell check needs a product-type sampler, got {}",
            sampler.spec().kind.name()
        )));
    }
    if let SamplerKind::ParetoProduct { alpha } = sampler.spec().kind {
        if alpha <= 2.0 * p {
            return Err(Error::Precondition(format!(
                "pareto_product thin-shell check needs alpha > 2p, got alpha = {alpha}, p = {p}"
            )));
        }
    }
    let mut out = Vec::with_capacity(ranks.len());
    for &k in ranks {
        let proj = Projection::haar(sampler.dim(), k, rng)?;
        let moment = projected_deviation_moment(sampler, &proj, p, sample_count, rng)?;
        out.push(moment / (k as f64).powf(p / 2.0));
    }
    Ok(out)
}
