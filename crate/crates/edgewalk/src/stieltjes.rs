//! Lower/upper Stieltjes transforms and soft spectral edges.
//!
//! The lower transform of a spectrum is sum_i 1/(lambda_i - ell) for ell below
//! the spectrum; the upper transform is sum_i 1/(u - lambda_i) for u above it.
//! The soft edge at sensitivity phi is the unique point where the transform
//! equals phi; it strictly brackets the corresponding extreme eigenvalue.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symmat::{SymmetricSpectrum, Vector};

/// Which end of the spectrum a soft-edge query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy)]
pub struct SoftEdgeQuery {
    side: Side,
    phi: f64,
}

impl SoftEdgeQuery {
    pub fn new(side: Side, phi: f64) -> Result<Self> {
        if !(phi > 0.0 && phi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sensitivity phi must be finite and positive, got {phi}"
            )));
        }
        Ok(SoftEdgeQuery { side, phi })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SoftEdgeResult {
    pub edge: f64,
    pub transform_value_at_edge: f64,
    pub bracket_width_at_termination: f64,
}

/// Lower Stieltjes transform sum_i 1/(lambda_i - ell), for ell strictly below
/// the spectrum. Strictly positive and strictly increasing in ell.
pub fn lower_stieltjes(spec: &SymmetricSpectrum, ell: f64) -> Result<f64> {
    if !(ell < spec.lambda_min()) {
        return Err(Error::Precondition(format!(
            "lower transform needs ell < lambda_min, got ell = {ell}, lambda_min = {}",
            spec.lambda_min()
        )));
    }
    Ok(spec.eigenvalues().iter().map(|l| 1.0 / (l - ell)).sum())
}

/// Upper Stieltjes transform sum_i 1/(u - lambda_i), for u strictly above the
/// spectrum. Strictly positive and strictly decreasing in u.
pub fn upper_stieltjes(spec: &SymmetricSpectrum, u: f64) -> Result<f64> {
    if !(u > spec.lambda_max()) {
        return Err(Error::Precondition(format!(
            "upper transform needs u > lambda_max, got u = {u}, lambda_max = {}",
            spec.lambda_max()
        )));
    }
    Ok(spec.eigenvalues().iter().map(|l| 1.0 / (u - l)).sum())
}

/// Difference m̄(u) - m̄(u + delta) evaluated in product form, which avoids
/// the cancellation of subtracting two nearly equal sums.
pub(crate) fn upper_stieltjes_drop(spec: &SymmetricSpectrum, u: f64, delta: f64) -> f64 {
    spec.eigenvalues()
        .iter()
        .map(|l| delta / ((u - l) * (u + delta - l)))
        .sum()
}

/// Derivative of the lower transform with respect to ell: sum 1/(lambda-ell)^2.
fn lower_derivative(spec: &SymmetricSpectrum, ell: f64) -> f64 {
    spec.eigenvalues()
        .iter()
        .map(|l| {
            let d = l - ell;
            1.0 / (d * d)
        })
        .sum()
}

fn upper_derivative_abs(spec: &SymmetricSpectrum, u: f64) -> f64 {
    spec.eigenvalues()
        .iter()
        .map(|l| {
            let d = u - l;
            1.0 / (d * d)
        })
        .sum()
}

const BRACKET_TOL: f64 = 1e-13;
const EDGE_RESIDUAL_TOL: f64 = 1e-10;
const NEWTON_POLISH_STEPS: usize = 5;

/// Locate the soft spectral edge by bisection on a certified bracket followed
/// by a few Newton polish steps.
///
/// Lower bracket: [lambda_min - n/phi, lambda_min - 1/phi], valid because
/// 1/(lambda_min - ell) <= m <= n/(lambda_min - ell). Upper side symmetric.
pub fn soft_edge(spec: &SymmetricSpectrum, query: &SoftEdgeQuery) -> Result<SoftEdgeResult> {
    let phi = query.phi();
    let n = spec.dim() as f64;

    // f is (transform - phi) oriented so that f(a) <= 0 <= f(b).
    let (mut a, mut b): (f64, f64);
    match query.side() {
        Side::Lower => {
            let lmin = spec.lambda_min();
            a = lmin - n / phi;
            b = lmin - 1.0 / phi;
        }
        Side::Upper => {
            let lmax = spec.lambda_max();
            a = lmax + n / phi;
            b = lmax + 1.0 / phi;
        }
    }
    let value = |point: f64| -> f64 {
        match query.side() {
            Side::Lower => spec.eigenvalues().iter().map(|l| 1.0 / (l - point)).sum(),
            Side::Upper => spec.eigenvalues().iter().map(|l| 1.0 / (point - l)).sum(),
        }
    };
    let oriented = |point: f64| -> f64 {
        match query.side() {
            Side::Lower => value(point) - phi,
            Side::Upper => phi - value(point),
        }
    };

    // For the upper side the bracket is stored (a, b) = (far, near) so that
    // oriented(a) <= 0; normalize to a <= b for bisection bookkeeping.
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let (mut lo, mut hi) = (a, b);
    // Re-orient: want g(lo) <= 0 <= g(hi).
    let increasing = oriented(hi) >= oriented(lo);
    let g = |p: f64| if increasing { oriented(p) } else { -oriented(p) };

    while (hi - lo) > BRACKET_TOL * (1.0 + 0.5 * (lo.abs() + hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let bracket_width = hi - lo;
    let mut edge = 0.5 * (lo + hi);
    if edge < lo || edge > hi {
        edge = lo;
    }

    for _ in 0..NEWTON_POLISH_STEPS {
        let residual = value(edge) - phi;
        if residual.abs() <= 1e-13 * phi {
            break;
        }
        let derivative = match query.side() {
            Side::Lower => lower_derivative(spec, edge),
            Side::Upper => -upper_derivative_abs(spec, edge),
        };
        let next = (edge - residual / derivative).clamp(lo, hi);
        if next == edge {
            break;
        }
        edge = next;
    }

    let transform_value_at_edge = value(edge);
    if (transform_value_at_edge - phi).abs() > EDGE_RESIDUAL_TOL * phi {
        return Err(Error::RootFind(format!(
            "soft edge residual {:.3e} above {:.1e}*phi (phi = {phi}, edge = {edge})",
            (transform_value_at_edge - phi).abs(),
            EDGE_RESIDUAL_TOL
        )));
    }

    Ok(SoftEdgeResult {
        edge,
        transform_value_at_edge,
        bracket_width_at_termination: bracket_width,
    })
}

/// Rank-one update of the upper Stieltjes transform via the Sherman-Morrison
/// formula: m̄_{A+xxᵀ}(u) = m̄_A(u) + xᵀ(uI-A)⁻²x / (1 - xᵀ(uI-A)⁻¹x).
pub fn sherman_morrison_transform(spec: &SymmetricSpectrum, x: &Vector, u: f64) -> Result<f64> {
    if x.dim() != spec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "spectrum has dimension {}, vector has dimension {}",
            spec.dim(),
            x.dim()
        )));
    }
    if !(u > spec.lambda_max()) {
        return Err(Error::Precondition(format!(
            "Sherman-Morrison update needs u > lambda_max, got u = {u}, lambda_max = {}",
            spec.lambda_max()
        )));
    }
    let coeffs = spec.eigen_coeffs(x)?;
    let mut first = 0.0;
    let mut second = 0.0;
    for (c, &l) in coeffs.iter().zip(spec.eigenvalues()) {
        let d = u - l;
        first += c * c / d;
        second += c * c / (d * d);
    }
    let denom = 1.0 - first;
    if denom.abs() <= 1e-12 {
        return Err(Error::ResolventPole(denom));
    }
    Ok(upper_stieltjes(spec, u)? + second / denom)
}
