//! Feasible-shift machinery for rank-one barrier walks.
//!
//! After a rank-one update A -> A + xxᵀ, the soft spectral edges move by a
//! random amount. This module computes explicit certified shifts (the lower
//! shift delta built from the quadratic forms q1, q2; the upper shifts
//! Delta_1 and Delta_2 from Q1, Q2), checks feasibility conditions, solves
//! the minimal-mu problem, runs full barrier walks over a sample, and
//! evaluates the closed-form theorem constants.

use serde::Serialize;

use crate::distributions::Sampler;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stieltjes::{
    lower_stieltjes, soft_edge, upper_stieltjes, upper_stieltjes_drop, Side, SoftEdgeQuery,
};
use crate::symmat::{eigendecompose, rank_one_add, SymMatrix, SymmetricSpectrum, Vector};

/// Parameters of the explicit lower shift: sensitivity phi and the indicator
/// threshold t in (0, 1).
#[derive(Debug, Clone, Copy)]
pub struct LowerShiftParams {
    phi: f64,
    t: f64,
}

impl LowerShiftParams {
    pub fn new(phi: f64, t: f64) -> Result<Self> {
        if !(phi > 0.0 && phi.is_finite()) {
            return Err(Error::InvalidParameter(format!("phi must be positive, got {phi}")));
        }
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidParameter(format!("t must lie in (0,1), got {t}")));
        }
        Ok(LowerShiftParams { phi, t })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// Parameters of the upper shift pair: sensitivity phi and the split
/// parameter tau in (0, 1/2).
#[derive(Debug, Clone, Copy)]
pub struct UpperShiftParams {
    phi: f64,
    tau: f64,
}

impl UpperShiftParams {
    pub fn new(phi: f64, tau: f64) -> Result<Self> {
        if !(phi > 0.0 && phi.is_finite()) {
            return Err(Error::InvalidParameter(format!("phi must be positive, got {phi}")));
        }
        if !(tau > 0.0 && tau < 0.5) {
            return Err(Error::InvalidParameter(format!("tau must lie in (0,1/2), got {tau}")));
        }
        Ok(UpperShiftParams { phi, tau })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

fn coeffs_sq(spec: &SymmetricSpectrum, x: &Vector) -> Result<Vec<f64>> {
    Ok(spec.eigen_coeffs(x)?.into_iter().map(|c| c * c).collect())
}

/// Lower-side quadratic forms at shift delta >= 0:
/// q1 = xᵀ(A - ell - delta)⁻¹x and
/// q2 = xᵀ(A - ell - delta)⁻²x / tr(A - ell - delta)⁻².
pub fn lower_forms(
    spec: &SymmetricSpectrum,
    ell: f64,
    delta: f64,
    x: &Vector,
) -> Result<(f64, f64)> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be >= 0, got {delta}")));
    }
    if !(spec.lambda_min() > ell + delta) {
        return Err(Error::Precondition(format!(
            "need A strictly above ell + delta = {}, got lambda_min = {}",
            ell + delta,
            spec.lambda_min()
        )));
    }
    let w = coeffs_sq(spec, x)?;
    let mut q1 = 0.0;
    let mut num2 = 0.0;
    let mut tr2 = 0.0;
    for (wi, &l) in w.iter().zip(spec.eigenvalues()) {
        let d = l - ell - delta;
        q1 += wi / d;
        num2 += wi / (d * d);
        tr2 += 1.0 / (d * d);
    }
    Ok((q1, num2 / tr2))
}

/// Slack accepted when checking `m(ell) <= phi` at a numerically computed
/// soft edge (where equality holds to the edge solver's tolerance).
const TRANSFORM_LEVEL_SLACK: f64 = 1e-9;

/// The explicit feasible lower shift
/// delta = (1-t)^3 q2(0,x) 1\{q1(0,x) <= t\} 1\{q2(0,x) <= t/phi\}.
/// Indicator boundaries count as satisfied.
pub fn explicit_lower_shift(
    spec: &SymmetricSpectrum,
    ell: f64,
    params: &LowerShiftParams,
    x: &Vector,
) -> Result<f64> {
    if !(spec.lambda_min() > ell) {
        return Err(Error::Precondition(format!(
            "need A strictly above ell = {ell}, got lambda_min = {}",
            spec.lambda_min()
        )));
    }
    let m = lower_stieltjes(spec, ell)?;
    if m > params.phi() * (1.0 + TRANSFORM_LEVEL_SLACK) {
        return Err(Error::Precondition(format!(
            "need m(ell) <= phi, got m = {m}, phi = {}",
            params.phi()
        )));
    }
    let (q1, q2) = lower_forms(spec, ell, 0.0, x)?;
    let t = params.t();
    if q1 <= t && q2 <= t / params.phi() {
        Ok((1.0 - t).powi(3) * q2)
    } else {
        Ok(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Infeasible(String),
}

/// Sub-condition report for a candidate lower shift.
#[derive(Debug, Clone)]
pub struct LowerFeasibility {
    /// lambda_min(A) > ell + delta.
    pub shift_keeps_positivity: bool,
    /// (1/delta) q2(delta,x) - q1(delta,x); None for the trivial delta = 0.
    pub barrier_value: Option<f64>,
    /// Sufficient condition: barrier value >= 1 (trivially true at delta = 0).
    pub barrier_sufficient: bool,
    /// m̲_A(ell).
    pub transform_before: f64,
    /// m̲_{A+xxᵀ}(ell + delta), when the shifted point stays below the spectrum.
    pub transform_after: Option<f64>,
    pub verdict: Feasibility,
}

/// Check a candidate lower shift against both the sufficient barrier
/// condition and the defining inequalities of feasibility.
pub fn check_lower_feasibility(
    a: &SymMatrix,
    ell: f64,
    delta: f64,
    x: &Vector,
) -> Result<LowerFeasibility> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be >= 0, got {delta}")));
    }
    let spec = eigendecompose(a)?;
    if !(spec.lambda_min() > ell) {
        return Err(Error::Precondition(format!(
            "need A strictly above ell = {ell}, got lambda_min = {}",
            spec.lambda_min()
        )));
    }
    let transform_before = lower_stieltjes(&spec, ell)?;
    let shift_keeps_positivity = spec.lambda_min() > ell + delta;

    let (barrier_value, barrier_sufficient) = if delta == 0.0 {
        (None, true)
    } else if shift_keeps_positivity {
        let (q1, q2) = lower_forms(&spec, ell, delta, x)?;
        let value = q2 / delta - q1;
        (Some(value), value >= 1.0)
    } else {
        (None, false)
    };

    let transform_after = if shift_keeps_positivity {
        let updated = eigendecompose(&rank_one_add(a, x)?)?;
        if updated.lambda_min() > ell + delta {
            Some(lower_stieltjes(&updated, ell + delta)?)
        } else {
            None
        }
    } else {
        None
    };

    let verdict = if !shift_keeps_positivity {
        Feasibility::Infeasible("A is not strictly above ell + delta".into())
    } else {
        match transform_after {
            Some(after) if after <= transform_before => Feasibility::Feasible,
            Some(_) => Feasibility::Infeasible("transform increased at the shifted point".into()),
            None => Feasibility::Infeasible("updated spectrum reached the shifted point".into()),
        }
    };

    Ok(LowerFeasibility {
        shift_keeps_positivity,
        barrier_value,
        barrier_sufficient,
        transform_before,
        transform_after,
        verdict,
    })
}

/// Upper-side quadratic forms at shift delta > 0.
#[derive(Debug, Clone, Copy)]
pub struct UpperForms {
    /// Q1 = xᵀ(u + delta - A)⁻¹x.
    pub q1: f64,
    /// Q2 = xᵀ(u + delta - A)⁻²x / (m̄_A(u) - m̄_A(u + delta)).
    pub q2: f64,
    /// Q2' = xᵀ(u + delta - A)⁻²x / tr(u + delta - A)⁻².
    pub q2_prime: f64,
}

pub fn upper_forms(
    spec: &SymmetricSpectrum,
    u: f64,
    delta: f64,
    x: &Vector,
) -> Result<UpperForms> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be > 0, got {delta}")));
    }
    if !(spec.lambda_max() < u) {
        return Err(Error::Precondition(format!(
            "need A strictly below u = {u}, got lambda_max = {}",
            spec.lambda_max()
        )));
    }
    let w = coeffs_sq(spec, x)?;
    let mut q1 = 0.0;
    let mut num2 = 0.0;
    let mut tr2 = 0.0;
    for (wi, &l) in w.iter().zip(spec.eigenvalues()) {
        let d = u + delta - l;
        q1 += wi / d;
        num2 += wi / (d * d);
        tr2 += 1.0 / (d * d);
    }
    let drop = upper_stieltjes_drop(spec, u, delta);
    Ok(UpperForms {
        q1,
        q2: num2 / drop,
        q2_prime: num2 / tr2,
    })
}

const ROOT_ABS_TOL: f64 = 1e-12;
const BRACKET_DOUBLING_CAP: f64 = (1u64 << 60) as f64;

/// Smallest Delta >= 0 with Q1(Delta, x) <= tau. Q1 is decreasing in Delta,
/// so this is 0 when already satisfied and otherwise the root of Q1 = tau,
/// bracketed by [0, ||x||^2 / tau].
pub fn delta1(spec: &SymmetricSpectrum, u: f64, tau: f64, x: &Vector) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    if !(spec.lambda_max() < u) {
        return Err(Error::Precondition(format!(
            "need A strictly below u = {u}, got lambda_max = {}",
            spec.lambda_max()
        )));
    }
    let w = coeffs_sq(spec, x)?;
    let q1_at = |delta: f64| -> f64 {
        w.iter()
            .zip(spec.eigenvalues())
            .map(|(wi, &l)| wi / (u + delta - l))
            .sum()
    };
    if q1_at(0.0) <= tau {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = x.norm_sq() / tau;
    while hi - lo > ROOT_ABS_TOL * (1.0 + 0.5 * (lo + hi)) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q1_at(mid) > tau {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut delta = 0.5 * (lo + hi);
    for _ in 0..5 {
        let residual = q1_at(delta) - tau;
        if residual.abs() <= 1e-14 * tau {
            break;
        }
        let derivative: f64 = w
            .iter()
            .zip(spec.eigenvalues())
            .map(|(wi, &l)| {
                let d = u + delta - l;
                -wi / (d * d)
            })
            .sum();
        let next = (delta - residual / derivative).clamp(lo, hi);
        if next == delta {
            break;
        }
        delta = next;
    }
    Ok(delta)
}

/// Smallest Delta >= 0 with Q2(Delta, x) <= 1 - tau. For x != 0 the form
/// blows up as Delta -> 0+, so the shift is the positive root of
/// Q2 = 1 - tau, bracketed by doubling and halving from Delta = 1.
pub fn delta2(spec: &SymmetricSpectrum, u: f64, tau: f64, x: &Vector) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParameter(format!("tau must lie in (0,1), got {tau}")));
    }
    if !(spec.lambda_max() < u) {
        return Err(Error::Precondition(format!(
            "need A strictly below u = {u}, got lambda_max = {}",
            spec.lambda_max()
        )));
    }
    if x.norm_sq() == 0.0 {
        return Ok(0.0);
    }
    let w = coeffs_sq(spec, x)?;
    let q2_at = |delta: f64| -> f64 {
        let num: f64 = w
            .iter()
            .zip(spec.eigenvalues())
            .map(|(wi, &l)| {
                let d = u + delta - l;
                wi / (d * d)
            })
            .sum();
        num / upper_stieltjes_drop(spec, u, delta)
    };
    let target = 1.0 - tau;

    let mut hi = 1.0;
    let mut lo;
    if q2_at(hi) > target {
        loop {
            let next = hi * 2.0;
            if next > BRACKET_DOUBLING_CAP {
                return Err(Error::RootFind(format!(
                    "doubling bracket for Delta_2 exceeded 2^60 (u = {u}, tau = {tau})"
                )));
            }
            if q2_at(next) <= target {
                lo = hi;
                hi = next;
                break;
            }
            hi = next;
        }
    } else {
        lo = 0.5;
        let mut halvings = 0;
        while q2_at(lo) <= target {
            hi = lo;
            lo *= 0.5;
            halvings += 1;
            if halvings > 200 {
                // x is so small that every representable positive shift
                // already satisfies the bound.
                return Ok(hi);
            }
        }
    }

    while hi - lo > ROOT_ABS_TOL * (1.0 + 0.5 * (lo + hi)) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q2_at(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Sub-condition report for a candidate upper shift.
#[derive(Debug, Clone)]
pub struct UpperFeasibility {
    pub q1: f64,
    pub q2: f64,
    /// Sufficient condition: Q1 + Q2 <= 1.
    pub sufficient: bool,
    /// First conclusion: lambda_max(A + xxᵀ) < u + delta.
    pub eigen_bound_ok: bool,
    /// m̄_A(u).
    pub transform_before: f64,
    /// m̄_{A+xxᵀ}(u + delta), when defined.
    pub transform_after: Option<f64>,
    /// Second conclusion: transform did not increase.
    pub transform_ok: bool,
    pub verdict: Feasibility,
}

/// Check a candidate upper shift: the sufficient condition Q1 + Q2 <= 1 and
/// both conclusions (spectrum stays below u + delta, transform does not
/// increase).
pub fn check_upper_feasibility(
    a: &SymMatrix,
    u: f64,
    delta: f64,
    x: &Vector,
) -> Result<UpperFeasibility> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be > 0, got {delta}")));
    }
    let spec = eigendecompose(a)?;
    let forms = upper_forms(&spec, u, delta, x)?;
    let sufficient = forms.q1 + forms.q2 <= 1.0;
    let transform_before = upper_stieltjes(&spec, u)?;

    let updated = eigendecompose(&rank_one_add(a, x)?)?;
    let eigen_bound_ok = updated.lambda_max() < u + delta;
    let transform_after = if eigen_bound_ok {
        Some(upper_stieltjes(&updated, u + delta)?)
    } else {
        None
    };
    let transform_ok = matches!(transform_after, Some(after) if after <= transform_before);

    let verdict = if eigen_bound_ok && transform_ok {
        Feasibility::Feasible
    } else {
        let mut reasons = Vec::new();
        if !sufficient {
            reasons.push("Q1+Q2 > 1");
        }
        if !eigen_bound_ok {
            reasons.push("A+xxT is not strictly below u + delta");
        }
        if eigen_bound_ok && !transform_ok {
            reasons.push("transform increased at the shifted point");
        }
        Feasibility::Infeasible(reasons.join("; "))
    };

    Ok(UpperFeasibility {
        q1: forms.q1,
        q2: forms.q2,
        sufficient,
        eigen_bound_ok,
        transform_before,
        transform_after,
        transform_ok,
        verdict,
    })
}

/// Minimal mu >= 0 with sum_i xi_i / (mu_i + mu) <= bound. The left side is
/// strictly decreasing in mu, so the answer is 0 when satisfied at 0 and
/// otherwise found by a doubling bracket plus bisection.
pub fn minimal_mu(xi: &[f64], mu: &[f64], bound: f64) -> Result<f64> {
    if xi.is_empty() || mu.is_empty() {
        return Err(Error::Empty("minimal_mu needs nonempty sequences".into()));
    }
    if xi.len() != mu.len() {
        return Err(Error::DimensionMismatch(format!(
            "xi has {} entries, mu has {}",
            xi.len(),
            mu.len()
        )));
    }
    if xi.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter("xi entries must be finite and >= 0".into()));
    }
    if mu.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter("mu entries must be finite and > 0".into()));
    }
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::InvalidParameter(format!("bound must be positive, got {bound}")));
    }
    let lhs = |m: f64| -> f64 { xi.iter().zip(mu).map(|(x, mi)| x / (mi + m)).sum() };
    if lhs(0.0) <= bound {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while lhs(hi) > bound {
        hi *= 2.0;
        if hi > BRACKET_DOUBLING_CAP {
            return Err(Error::RootFind("doubling bracket for minimal mu exceeded 2^60".into()));
        }
    }
    let mut lo = if hi == 1.0 { 0.0 } else { hi / 2.0 };
    while hi - lo > ROOT_ABS_TOL * (1.0 + 0.5 * (lo + hi)) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lhs(mid) > bound {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Side-specific parameters of a barrier walk.
#[derive(Debug, Clone, Copy)]
pub enum WalkParams {
    Lower(LowerShiftParams),
    Upper(UpperShiftParams),
}

impl WalkParams {
    pub fn side(&self) -> Side {
        match self {
            WalkParams::Lower(_) => Side::Lower,
            WalkParams::Upper(_) => Side::Upper,
        }
    }

    pub fn phi(&self) -> f64 {
        match self {
            WalkParams::Lower(p) => p.phi(),
            WalkParams::Upper(p) => p.phi(),
        }
    }
}

/// Per-step record of a barrier walk. For a lower walk `diag_a`/`diag_b` are
/// q1(0,X)/q2(0,X); for an upper walk they are Delta_1/Delta_2.
#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub edge_before: f64,
    pub edge_after: f64,
    pub exact_increment: f64,
    pub explicit_shift: f64,
    pub diag_a: f64,
    pub diag_b: f64,
    /// Lower: both indicators of the explicit shift fired.
    /// Upper: Q1 + Q2 <= 1 held at the combined shift.
    pub sufficient_ok: bool,
}

/// State of a barrier walk after `step` rank-one updates.
#[derive(Debug, Clone)]
pub struct WalkState {
    pub side: Side,
    pub phi: f64,
    pub steps: usize,
    pub matrix: SymMatrix,
    pub spectrum: SymmetricSpectrum,
    pub edge: f64,
    pub shift_log: Vec<StepRecord>,
}

/// Run a barrier walk: starting from A_0 = 0 with edge -n/phi (lower) or
/// n/phi (upper), repeatedly draw X_k, update A_k = A_{k-1} + X_k X_kᵀ,
/// recompute the exact soft edge, and log the explicit feasible shift as a
/// certificate next to the exact edge increment.
pub fn barrier_walk(
    sampler: &Sampler,
    steps: usize,
    params: &WalkParams,
    seed: u64,
) -> Result<WalkState> {
    let n = sampler.dim();
    let query = SoftEdgeQuery::new(params.side(), params.phi())?;
    let mut a = SymMatrix::zeros(n);
    let mut spec = eigendecompose(&a)?;
    let mut edge = soft_edge(&spec, &query)?.edge;
    let mut shift_log = Vec::with_capacity(steps);
    let mut rng = RngStream::new(seed, 0);

    for step in 1..=steps {
        let x = sampler.draw(&mut rng);
        let (explicit_shift, diag_a, diag_b, sufficient_ok) = match params {
            WalkParams::Lower(p) => {
                let (q1, q2) = lower_forms(&spec, edge, 0.0, &x)?;
                let fired = q1 <= p.t() && q2 <= p.t() / p.phi();
                let shift = if fired { (1.0 - p.t()).powi(3) * q2 } else { 0.0 };
                (shift, q1, q2, fired)
            }
            WalkParams::Upper(p) => {
                let d1 = delta1(&spec, edge, p.tau(), &x)?;
                let d2 = delta2(&spec, edge, p.tau(), &x)?;
                let shift = d1.max(d2);
                let sum_ok = if shift > 0.0 {
                    let forms = upper_forms(&spec, edge, shift, &x)?;
                    forms.q1 + forms.q2 <= 1.0 + 1e-9
                } else {
                    true
                };
                (shift, d1, d2, sum_ok)
            }
        };

        a = rank_one_add(&a, &x)?;
        spec = eigendecompose(&a)?;
        let next_edge = soft_edge(&spec, &query)?.edge;
        shift_log.push(StepRecord {
            step,
            edge_before: edge,
            edge_after: next_edge,
            exact_increment: next_edge - edge,
            explicit_shift,
            diag_a,
            diag_b,
            sufficient_ok,
        });
        edge = next_edge;
    }

    Ok(WalkState {
        side: params.side(),
        phi: params.phi(),
        steps,
        matrix: a,
        spectrum: spec,
        edge,
        shift_log,
    })
}

/// Closed-form constants of the shift and sample-size theorems, evaluated at
/// regularity parameters (C, eta), accuracy eps and split parameter tau.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TheoremConstants {
    pub c: f64,
    pub eta: f64,
    pub eps: f64,
    pub tau: f64,
    /// Sample-size factor for the two-sided spectral norm bound.
    pub c_main: f64,
    /// Sample-size factor for the smallest-eigenvalue bound.
    pub c_lower: f64,
    /// Sample-size factor for the largest-eigenvalue bound.
    pub c_upper: f64,
    /// Sensitivity coefficient of the expected lower-shift theorem.
    pub c_lower_shift: f64,
    /// Sensitivity coefficient of the expected upper-shift theorem.
    pub c_upper_shift: f64,
    /// Sensitivity bound phi <= c_lower_shift * eps^(1 + 2/eta).
    pub phi_lower_bound: f64,
    /// Sensitivity bound phi <= c_upper_shift * eps^(1 + 2/eta).
    pub phi_upper_bound: f64,
    /// Sensitivity bound under which E Delta_1 <= eps.
    pub phi1: f64,
    /// Sensitivity bound under which E Delta_2 <= 1 + eps.
    pub phi2: f64,
    /// Exponent in the fixed-sample-size edge bound.
    pub edge_exponent: f64,
    /// Constant in the fixed-sample-size edge bound.
    pub c1: f64,
    /// Sample-size factor of the trace concentration bound.
    pub c_trace: f64,
}

/// C1 in the fixed-sample-size edge bound 1 - C1 y^c <= E lambda_min.
pub fn edge_bound_constant(c: f64, eta: f64) -> f64 {
    512.0 * (16.0 * c).powf(1.0 + 2.0 / eta) * (6.0 + 6.0 / eta).powf(1.0 + 4.0 / eta)
}

/// Exponent c = eta / (2 eta + 2) in the fixed-sample-size edge bound.
pub fn edge_bound_exponent(eta: f64) -> f64 {
    eta / (2.0 * eta + 2.0)
}

pub fn compute_constants(c: f64, eta: f64, eps: f64, tau: f64) -> Result<TheoremConstants> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0,1), got {eps}")));
    }
    if !(tau > 0.0 && 4.0 * tau < eps) {
        return Err(Error::InvalidParameter(format!(
            "tau must lie in (0, eps/4) so that phi2 stays positive, got tau = {tau}, eps = {eps}"
        )));
    }

    let c_main = 512.0 * (48.0 * c).powf(2.0 + 2.0 / eta) * (6.0 + 6.0 / eta).powf(1.0 + 4.0 / eta);
    let c_lower = 40.0 * (10.0 * c).powf(2.0 / eta);
    let c_upper = edge_bound_constant(c, eta);
    let c_lower_shift = 1.0 / (10.0 * (5.0 * c).powf(2.0 / eta));
    let c_upper_shift =
        1.0 / (256.0 * (8.0 * c).powf(1.0 + 2.0 / eta) * (6.0 + 6.0 / eta).powf(1.0 + 4.0 / eta));
    let phi1 = tau.powf(1.0 + 1.0 / eta) * eps.powf(1.0 / eta)
        / ((4.0 * c).powf(1.0 + 1.0 / eta) * (4.0 + 4.0 / eta).powf(1.0 + 3.0 / eta));
    let phi2 = eps.powf(2.0 / eta) * (eps - 4.0 * tau)
        / (128.0 * (2.0 * c).powf(2.0 / eta) * (4.0 + 6.0 / eta).powf(4.0 / eta));
    let shift_exponent = 1.0 + 2.0 / eta;

    Ok(TheoremConstants {
        c,
        eta,
        eps,
        tau,
        c_main,
        c_lower,
        c_upper,
        c_lower_shift,
        c_upper_shift,
        phi_lower_bound: c_lower_shift * eps.powf(shift_exponent),
        phi_upper_bound: c_upper_shift * eps.powf(shift_exponent),
        phi1,
        phi2,
        edge_exponent: edge_bound_exponent(eta),
        c1: c_upper,
        c_trace: (4.0 * c).powf(2.0 + 2.0 / eta) * (1.0 + 1.0 / eta).powf(2.0 / eta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{SamplerKind, SamplerSpec};
    use crate::symmat::ResolventPower;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_symmetric(n: usize, rng: &mut RngStream) -> SymMatrix {
        SymMatrix::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal)).unwrap()
    }

    fn random_vector(n: usize, rng: &mut RngStream) -> Vector {
        Vector::new((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).unwrap()
    }

    #[test]
    fn lower_forms_scalar_case() {
        let spec = eigendecompose(&SymMatrix::from_diag(&[2.0]).unwrap()).unwrap();
        let x = Vector::new(vec![0.5]).unwrap();
        let (q1, q2) = lower_forms(&spec, 0.0, 0.0, &x).unwrap();
        assert!((q1 - 0.125).abs() <= 1e-15);
        assert!((q2 - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn lower_forms_zero_vector() {
        let mut rng = RngStream::new(1, 0);
        let spec = eigendecompose(&random_symmetric(5, &mut rng)).unwrap();
        let ell = spec.lambda_min() - 2.0;
        let (q1, q2) = lower_forms(&spec, ell, 0.3, &Vector::zeros(5)).unwrap();
        assert_eq!((q1, q2), (0.0, 0.0));
    }

    #[test]
    fn lower_quadratic_regularity_sandwich() {
        let mut rng = RngStream::new(2, 0);
        for _ in 0..400 {
            let n = 1 + rng.random_range(0..8usize);
            let spec = eigendecompose(&random_symmetric(n, &mut rng)).unwrap();
            let phi = 0.1 + 0.8 * rng.random::<f64>();
            let ell = soft_edge(&spec, &SoftEdgeQuery::new(Side::Lower, phi).unwrap())
                .unwrap()
                .edge;
            let x = random_vector(n, &mut rng);
            let delta = 0.99 * rng.random::<f64>() / phi;
            let (q1_0, q2_0) = lower_forms(&spec, ell, 0.0, &x).unwrap();
            let (q1_d, q2_d) = lower_forms(&spec, ell, delta, &x).unwrap();
            let damp = 1.0 - delta * phi;
            let slack = 1e-9 * (1.0 + q1_0.abs() + q2_0.abs());
            assert!(q1_0 <= q1_d + slack);
            assert!(q1_d <= q1_0 / damp + slack);
            assert!(damp * damp * q2_0 <= q2_d + slack);
            assert!(q2_d <= q2_0 / (damp * damp) + slack);
        }
    }

    #[test]
    fn explicit_lower_shift_scalar_example() {
        let spec = eigendecompose(&SymMatrix::from_diag(&[2.0]).unwrap()).unwrap();
        let x = Vector::new(vec![0.5]).unwrap();
        let params = LowerShiftParams::new(0.5, 0.2).unwrap();
        let delta = explicit_lower_shift(&spec, 0.0, &params, &x).unwrap();
        assert!((delta - 0.128).abs() <= 1e-15);

        // Oracle: the shifted transform of A + xxᵀ stays at or below phi.
        let a = SymMatrix::from_diag(&[2.0]).unwrap();
        let updated = eigendecompose(&rank_one_add(&a, &x).unwrap()).unwrap();
        let after = lower_stieltjes(&updated, delta).unwrap();
        assert!((after - 1.0 / 2.122).abs() <= 1e-12);
        assert!(after <= 0.5);
    }

    #[test]
    fn explicit_lower_shift_indicators() {
        let spec = eigendecompose(&SymMatrix::from_diag(&[2.0]).unwrap()).unwrap();
        // q1(0,x) = x^2/2 > t kills the shift.
        let x = Vector::new(vec![1.5]).unwrap();
        let params = LowerShiftParams::new(0.5, 0.2).unwrap();
        assert_eq!(explicit_lower_shift(&spec, 0.0, &params, &x).unwrap(), 0.0);
        // x = 0 gives delta = 0 through q2 = 0.
        assert_eq!(
            explicit_lower_shift(&spec, 0.0, &params, &Vector::zeros(1)).unwrap(),
            0.0
        );
    }

    #[test]
    fn explicit_lower_shift_stays_below_t_over_phi() {
        let mut rng = RngStream::new(3, 0);
        for _ in 0..200 {
            let n = 1 + rng.random_range(0..10usize);
            let spec = eigendecompose(&random_symmetric(n, &mut rng)).unwrap();
            let phi = 0.1 + 0.8 * rng.random::<f64>();
            let t = 0.05 + 0.9 * rng.random::<f64>();
            let ell = soft_edge(&spec, &SoftEdgeQuery::new(Side::Lower, phi).unwrap())
                .unwrap()
                .edge;
            let params = LowerShiftParams::new(phi, t).unwrap();
            let x = random_vector(n, &mut rng);
            let delta = explicit_lower_shift(&spec, ell, &params, &x).unwrap();
            assert!(delta >= 0.0);
            assert!(delta <= t / phi + 1e-12);
        }
    }

    #[test]
    fn lower_feasibility_examples() {
        let a = SymMatrix::from_diag(&[2.0]).unwrap();
        let x = Vector::new(vec![0.5]).unwrap();

        let trivial = check_lower_feasibility(&a, 0.0, 0.0, &x).unwrap();
        assert_eq!(trivial.verdict, Feasibility::Feasible);
        assert!(trivial.barrier_value.is_none());
        assert!(trivial.barrier_sufficient);

        let explicit = check_lower_feasibility(&a, 0.0, 0.128, &x).unwrap();
        assert_eq!(explicit.verdict, Feasibility::Feasible);

        let too_big = check_lower_feasibility(&a, 0.0, 2.5, &x).unwrap();
        assert!(!too_big.shift_keeps_positivity);
        assert!(matches!(too_big.verdict, Feasibility::Infeasible(_)));
    }

    #[test]
    fn lower_feasibility_implication_randomized() {
        let mut rng = RngStream::new(5, 0);
        let mut sufficient_seen = 0;
        for _ in 0..500 {
            let n = 1 + rng.random_range(0..8usize);
            let a = random_symmetric(n, &mut rng);
            let spec = eigendecompose(&a).unwrap();
            let phi = 0.1 + 0.8 * rng.random::<f64>();
            let ell = soft_edge(&spec, &SoftEdgeQuery::new(Side::Lower, phi).unwrap())
                .unwrap()
                .edge;
            let x = random_vector(n, &mut rng);
            let delta = rng.random::<f64>() * (spec.lambda_min() - ell) * 0.95;
            let report = check_lower_feasibility(&a, ell, delta, &x).unwrap();
            if let Some(value) = report.barrier_value {
                if value >= 1.0 + 1e-9 {
                    sufficient_seen += 1;
                    assert_eq!(
                        report.verdict,
                        Feasibility::Feasible,
                        "barrier condition held (value {value}) but shift was infeasible"
                    );
                }
            }
        }
        assert!(sufficient_seen > 20, "test exercised too few sufficient instances");
    }

    #[test]
    fn upper_forms_scalar_example() {
        let spec = eigendecompose(&SymMatrix::zeros(1)).unwrap();
        let x = Vector::new(vec![1.0]).unwrap();
        let forms = upper_forms(&spec, 2.0, 1.0, &x).unwrap();
        assert!((forms.q1 - 1.0 / 3.0).abs() <= 1e-15);
        assert!((forms.q2 - 2.0 / 3.0).abs() <= 1e-14);
        assert!((forms.q2_prime - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn upper_forms_zero_vector_and_relation() {
        let mut rng = RngStream::new(7, 0);
        let spec = eigendecompose(&random_symmetric(6, &mut rng)).unwrap();
        let u = spec.lambda_max() + 0.5;
        let forms = upper_forms(&spec, u, 0.7, &Vector::zeros(6)).unwrap();
        assert_eq!((forms.q1, forms.q2, forms.q2_prime), (0.0, 0.0, 0.0));

        for _ in 0..300 {
            let n = 1 + rng.random_range(0..8usize);
            let spec = eigendecompose(&random_symmetric(n, &mut rng)).unwrap();
            let u = spec.lambda_max() + 0.1 + rng.random::<f64>();
            let delta = 0.01 + 3.0 * rng.random::<f64>();
            let x = random_vector(n, &mut rng);
            let forms = upper_forms(&spec, u, delta, &x).unwrap();
            assert!(
                forms.q2 <= forms.q2_prime / delta + 1e-9 * (1.0 + forms.q2.abs()),
                "Q2 <= Q2'/Delta violated"
            );
        }
    }

    #[test]
    fn delta1_closed_form_and_trivial_cases() {
        let spec = eigendecompose(&SymMatrix::zeros(1)).unwrap();
        let x = Vector::new(vec![2.0]).unwrap();
        let d = delta1(&spec, 2.0, 0.5, &x).unwrap();
        assert!((d - 6.0).abs() <= 1e-9);

        // Already satisfied at Delta = 0.
        let small = Vector::new(vec![0.5]).unwrap();
        assert_eq!(delta1(&spec, 2.0, 0.5, &small).unwrap(), 0.0);
        assert_eq!(delta1(&spec, 2.0, 0.5, &Vector::zeros(1)).unwrap(), 0.0);
    }

    #[test]
    fn delta2_closed_form_and_monotonicity() {
        let spec = eigendecompose(&SymMatrix::zeros(1)).unwrap();
        let x = Vector::new(vec![1.0]).unwrap();
        let d = delta2(&spec, 2.0, 0.25, &x).unwrap();
        let expected = -1.0 + (11.0f64 / 3.0).sqrt();
        assert!((d - expected).abs() <= 1e-9);
        let forms = upper_forms(&spec, 2.0, d, &x).unwrap();
        assert!((forms.q2 - 0.75).abs() <= 1e-9);

        assert_eq!(delta2(&spec, 2.0, 0.25, &Vector::zeros(1)).unwrap(), 0.0);

        let mut rng = RngStream::new(11, 0);
        for _ in 0..200 {
            let n = 1 + rng.random_range(0..8usize);
            let spec = eigendecompose(&random_symmetric(n, &mut rng)).unwrap();
            let u = spec.lambda_max() + 0.2 + rng.random::<f64>();
            let tau = 0.05 + 0.4 * rng.random::<f64>();
            let x = random_vector(n, &mut rng);
            let d2 = delta2(&spec, u, tau, &x).unwrap();
            assert!(d2 > 0.0);
            let at_double = upper_forms(&spec, u, 2.0 * d2, &x).unwrap().q2;
            assert!(at_double < 1.0 - tau + 1e-9);
        }
    }

    #[test]
    fn upper_feasibility_examples() {
        let mut rng = RngStream::new(13, 0);
        // Combined shift from delta1/delta2 is feasible on random instances.
        for _ in 0..200 {
            let n = 1 + rng.random_range(0..8usize);
            let a = random_symmetric(n, &mut rng);
            let spec = eigendecompose(&a).unwrap();
            let phi = 0.1 + 0.8 * rng.random::<f64>();
            let u = soft_edge(&spec, &SoftEdgeQuery::new(Side::Upper, phi).unwrap())
                .unwrap()
                .edge;
            let tau = 0.05 + 0.4 * rng.random::<f64>();
            let x = random_vector(n, &mut rng);
            let shift = delta1(&spec, u, tau, &x)
                .unwrap()
                .max(delta2(&spec, u, tau, &x).unwrap());
            if shift > 0.0 {
                let report = check_upper_feasibility(&a, u, shift, &x).unwrap();
                assert!(report.q1 + report.q2 <= 1.0 + 1e-9);
                assert_eq!(report.verdict, Feasibility::Feasible);
            }
        }

        // x = 0 with any positive shift is feasible.
        let a = SymMatrix::from_diag(&[0.3, -0.2]).unwrap();
        let report = check_upper_feasibility(&a, 1.0, 0.5, &Vector::zeros(2)).unwrap();
        assert_eq!(report.verdict, Feasibility::Feasible);

        // Tiny shift with a large vector: sufficient condition fails and the
        // reason names it.
        let a = SymMatrix::from_diag(&[0.0]).unwrap();
        let x = Vector::new(vec![10.0]).unwrap();
        let report = check_upper_feasibility(&a, 1.0, 0.01, &x).unwrap();
        assert!(!report.sufficient);
        match report.verdict {
            Feasibility::Infeasible(ref reason) => assert!(reason.contains("Q1+Q2 > 1")),
            Feasibility::Feasible => panic!("expected infeasible"),
        }
    }

    #[test]
    fn upper_feasibility_implication_randomized() {
        let mut rng = RngStream::new(17, 0);
        let mut sufficient_seen = 0;
        for _ in 0..400 {
            let n = 1 + rng.random_range(0..6usize);
            let a = random_symmetric(n, &mut rng);
            let spec = eigendecompose(&a).unwrap();
            let phi = 0.1 + 0.8 * rng.random::<f64>();
            let u = soft_edge(&spec, &SoftEdgeQuery::new(Side::Upper, phi).unwrap())
                .unwrap()
                .edge;
            let x = random_vector(n, &mut rng);
            let delta = 0.05 + 4.0 * rng.random::<f64>();
            let report = check_upper_feasibility(&a, u, delta, &x).unwrap();
            if report.q1 + report.q2 <= 1.0 - 1e-9 {
                sufficient_seen += 1;
                assert!(report.eigen_bound_ok, "eigenvalue conclusion failed under Q1+Q2 <= 1");
                assert!(report.transform_ok, "transform conclusion failed under Q1+Q2 <= 1");
            }
        }
        assert!(sufficient_seen > 20);
    }

    #[test]
    fn feasible_shifts_move_the_edges() {
        let mut rng = RngStream::new(19, 0);
        for _ in 0..100 {
            let n = 1 + rng.random_range(0..6usize);
            let a = random_symmetric(n, &mut rng);
            let spec = eigendecompose(&a).unwrap();
            let phi = 0.2 + 0.6 * rng.random::<f64>();
            let x = random_vector(n, &mut rng);
            let updated = eigendecompose(&rank_one_add(&a, &x).unwrap()).unwrap();

            let ell = soft_edge(&spec, &SoftEdgeQuery::new(Side::Lower, phi).unwrap())
                .unwrap()
                .edge;
            let params = LowerShiftParams::new(phi, 0.3).unwrap();
            let delta = explicit_lower_shift(&spec, ell, &params, &x).unwrap();
            let ell_after = soft_edge(&updated, &SoftEdgeQuery::new(Side::Lower, phi).unwrap())
                .unwrap()
                .edge;
            assert!(ell_after >= ell + delta - 1e-8 * (1.0 + ell.abs()));

            let u = soft_edge(&spec, &SoftEdgeQuery::new(Side::Upper, phi).unwrap())
                .unwrap()
                .edge;
            let tau = 0.1;
            let shift = delta1(&spec, u, tau, &x)
                .unwrap()
                .max(delta2(&spec, u, tau, &x).unwrap());
            let u_after = soft_edge(&updated, &SoftEdgeQuery::new(Side::Upper, phi).unwrap())
                .unwrap()
                .edge;
            assert!(u_after <= u + shift + 1e-8 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn minimal_mu_examples() {
        assert_eq!(minimal_mu(&[1.0, 1.0], &[2.0, 2.0], 1.0).unwrap(), 0.0);
        let m = minimal_mu(&[1.0, 1.0], &[2.0, 2.0], 0.5).unwrap();
        assert!((m - 2.0).abs() <= 1e-10);

        // Single term: mu = (s/K - m)_+.
        let m = minimal_mu(&[3.0], &[0.5], 2.0).unwrap();
        assert!((m - 1.0).abs() <= 1e-10);
        assert_eq!(minimal_mu(&[3.0], &[10.0], 2.0).unwrap(), 0.0);

        assert!(matches!(minimal_mu(&[], &[], 1.0), Err(Error::Empty(_))));
        assert!(minimal_mu(&[1.0], &[0.0], 1.0).is_err());
    }

    #[test]
    fn minimal_mu_constraint_active_at_solution() {
        let mut rng = RngStream::new(23, 0);
        for _ in 0..200 {
            let n = 1 + rng.random_range(0..10usize);
            let xi: Vec<f64> = (0..n).map(|_| 0.1 + rng.random::<f64>() * 3.0).collect();
            let mu: Vec<f64> = (0..n).map(|_| 0.1 + rng.random::<f64>() * 5.0).collect();
            let bound = 0.05 + rng.random::<f64>();
            let m = minimal_mu(&xi, &mu, bound).unwrap();
            let lhs: f64 = xi.iter().zip(&mu).map(|(x, mi)| x / (mi + m)).sum();
            if m == 0.0 {
                assert!(lhs <= bound);
            } else {
                assert!((lhs - bound).abs() <= 1e-9 * bound);
            }
        }
    }

    #[test]
    fn walk_initial_edges_match_closed_form() {
        let sampler = Sampler::new(SamplerSpec {
            kind: SamplerKind::Gaussian,
            dim: 6,
            known_params: None,
        })
        .unwrap();
        let phi = 0.25;
        let lower = barrier_walk(
            &sampler,
            0,
            &WalkParams::Lower(LowerShiftParams::new(phi, 0.1).unwrap()),
            1,
        )
        .unwrap();
        assert!((lower.edge - (-24.0)).abs() <= 1e-9);
        let upper = barrier_walk(
            &sampler,
            0,
            &WalkParams::Upper(UpperShiftParams::new(phi, 0.1).unwrap()),
            1,
        )
        .unwrap();
        assert!((upper.edge - 24.0).abs() <= 1e-9);
    }

    #[test]
    fn walk_increments_dominate_certificates() {
        let sampler = Sampler::new(SamplerSpec {
            kind: SamplerKind::Gaussian,
            dim: 8,
            known_params: None,
        })
        .unwrap();
        let lower = barrier_walk(
            &sampler,
            60,
            &WalkParams::Lower(LowerShiftParams::new(0.05, 0.1).unwrap()),
            42,
        )
        .unwrap();
        assert!(lower.edge < lower.spectrum.lambda_min());
        for rec in &lower.shift_log {
            assert!(rec.explicit_shift >= 0.0);
            let slack = 1e-9 * (1.0 + rec.edge_before.abs());
            assert!(
                rec.exact_increment >= rec.explicit_shift - slack,
                "step {}: exact {} vs explicit {}",
                rec.step,
                rec.exact_increment,
                rec.explicit_shift
            );
        }

        let upper = barrier_walk(
            &sampler,
            60,
            &WalkParams::Upper(UpperShiftParams::new(0.05, 0.1).unwrap()),
            42,
        )
        .unwrap();
        assert!(upper.edge > upper.spectrum.lambda_max());
        for rec in &upper.shift_log {
            assert!(rec.explicit_shift >= 0.0);
            assert!(rec.sufficient_ok);
            let slack = 1e-9 * (1.0 + rec.edge_before.abs());
            assert!(rec.exact_increment >= -slack);
            assert!(
                rec.exact_increment <= rec.explicit_shift + slack,
                "step {}: exact {} vs explicit {}",
                rec.step,
                rec.exact_increment,
                rec.explicit_shift
            );
        }
    }

    #[test]
    fn walk_full_self_consistency() {
        // Full-walk oracle: mean exact increment >= mean explicit shift >= 0,
        // the edge transform stays pinned at phi, and the scaled covariance
        // keeps its smallest eigenvalue above the scaled edge.
        let n = 30;
        let steps = 3000;
        let phi = 0.05;
        let sampler = Sampler::new(SamplerSpec {
            kind: SamplerKind::Gaussian,
            dim: n,
            known_params: None,
        })
        .unwrap();
        let walk = barrier_walk(
            &sampler,
            steps,
            &WalkParams::Lower(LowerShiftParams::new(phi, 0.1).unwrap()),
            7,
        )
        .unwrap();
        let mean_exact: f64 =
            walk.shift_log.iter().map(|r| r.exact_increment).sum::<f64>() / steps as f64;
        let mean_explicit: f64 =
            walk.shift_log.iter().map(|r| r.explicit_shift).sum::<f64>() / steps as f64;
        assert!(mean_exact >= mean_explicit);
        assert!(mean_explicit >= 0.0);
        let at_edge = lower_stieltjes(&walk.spectrum, walk.edge).unwrap();
        assert!((at_edge - phi).abs() <= 1e-10 * phi);
        // lambda_min(Sigma_N) > edge/N, i.e. the edge certifies the scaled
        // covariance bound.
        assert!(walk.spectrum.lambda_min() / steps as f64 > walk.edge / steps as f64);
        assert!(walk.edge < walk.spectrum.lambda_min());
    }

    #[test]
    fn walk_is_deterministic_in_seed() {
        let sampler = Sampler::new(SamplerSpec {
            kind: SamplerKind::Cube,
            dim: 5,
            known_params: None,
        })
        .unwrap();
        let params = WalkParams::Lower(LowerShiftParams::new(0.1, 0.2).unwrap());
        let w1 = barrier_walk(&sampler, 20, &params, 9).unwrap();
        let w2 = barrier_walk(&sampler, 20, &params, 9).unwrap();
        assert_eq!(w1.edge.to_bits(), w2.edge.to_bits());
        for (a, b) in w1.shift_log.iter().zip(&w2.shift_log) {
            assert_eq!(a.exact_increment.to_bits(), b.exact_increment.to_bits());
            assert_eq!(a.explicit_shift.to_bits(), b.explicit_shift.to_bits());
        }
    }

    #[test]
    fn constants_reference_values() {
        let k = compute_constants(1.0, 2.0, 0.5, 0.1).unwrap();
        assert!((k.c_lower - 400.0).abs() <= 1e-9);
        assert!((k.edge_exponent - 1.0 / 3.0).abs() <= 1e-15);
        assert!((k.c_lower_shift - 0.02).abs() <= 1e-12);
        assert!((k.phi_lower_bound - 0.005).abs() <= 1e-12);
        // c1 and c_upper share the same closed form.
        assert_eq!(k.c1, k.c_upper);
        assert!(k.c_main > 0.0 && k.c_trace > 0.0 && k.phi1 > 0.0 && k.phi2 > 0.0);
    }

    #[test]
    fn constants_domain_violations() {
        assert!(compute_constants(1.0, 2.0, 0.5, 0.2).is_err()); // eps <= 4 tau
        assert!(compute_constants(0.0, 2.0, 0.5, 0.1).is_err());
        assert!(compute_constants(1.0, -1.0, 0.5, 0.1).is_err());
        assert!(compute_constants(1.0, 2.0, 1.5, 0.1).is_err());
    }

    #[test]
    fn moment_identities_monte_carlo() {
        // E q1(0,X) -> m(ell), E q2(0,X) -> 1, E Q2'(Delta,X) -> 1 for
        // isotropic X; checked within 5 standard errors.
        let mut rng = RngStream::new(29, 0);
        let a = random_symmetric(10, &mut rng);
        let spec = eigendecompose(&a).unwrap();
        let phi = 0.3;
        let ell = soft_edge(&spec, &SoftEdgeQuery::new(Side::Lower, phi).unwrap())
            .unwrap()
            .edge;
        let u = soft_edge(&spec, &SoftEdgeQuery::new(Side::Upper, phi).unwrap())
            .unwrap()
            .edge;
        let sampler = Sampler::new(SamplerSpec {
            kind: SamplerKind::Gaussian,
            dim: 10,
            known_params: None,
        })
        .unwrap();
        let trials = 20_000;
        let mut q1s = Vec::with_capacity(trials);
        let mut q2s = Vec::with_capacity(trials);
        let mut q2ps = Vec::with_capacity(trials);
        for _ in 0..trials {
            let x = sampler.draw(&mut rng);
            let (q1, q2) = lower_forms(&spec, ell, 0.0, &x).unwrap();
            q1s.push(q1);
            q2s.push(q2);
            q2ps.push(upper_forms(&spec, u, 0.8, &x).unwrap().q2_prime);
        }
        let m = lower_stieltjes(&spec, ell).unwrap();
        let (mean_q1, se_q1) = crate::stats::mean_and_se(&q1s);
        let (mean_q2, se_q2) = crate::stats::mean_and_se(&q2s);
        let (mean_q2p, se_q2p) = crate::stats::mean_and_se(&q2ps);
        assert!((mean_q1 - m).abs() <= 5.0 * se_q1, "E q1 = {mean_q1} vs m = {m}");
        assert!((mean_q2 - 1.0).abs() <= 5.0 * se_q2, "E q2 = {mean_q2}");
        assert!((mean_q2p - 1.0).abs() <= 5.0 * se_q2p, "E Q2' = {mean_q2p}");
    }

    #[test]
    fn q2_prime_regularity() {
        let mut rng = RngStream::new(31, 0);
        for _ in 0..300 {
            let n = 1 + rng.random_range(0..8usize);
            let spec = eigendecompose(&random_symmetric(n, &mut rng)).unwrap();
            let phi = 0.1 + 0.8 * rng.random::<f64>();
            let u = soft_edge(&spec, &SoftEdgeQuery::new(Side::Upper, phi).unwrap())
                .unwrap()
                .edge;
            let x = random_vector(n, &mut rng);
            let delta = 0.01 + 4.0 * rng.random::<f64>();
            let q2p_0 = {
                // Delta -> 0 limit evaluated directly from the resolvent forms.
                let num = crate::symmat::resolvent_form(&spec, u, ResolventPower::Two, &x).unwrap();
                let tr: f64 = spec
                    .eigenvalues()
                    .iter()
                    .map(|l| {
                        let d = u - l;
                        1.0 / (d * d)
                    })
                    .sum();
                num / tr
            };
            let q2p_d = upper_forms(&spec, u, delta, &x).unwrap().q2_prime;
            let bound = (1.0 + phi * delta) * (1.0 + phi * delta) * q2p_0;
            assert!(q2p_d <= bound + 1e-9 * (1.0 + bound.abs()));
        }
    }
}
