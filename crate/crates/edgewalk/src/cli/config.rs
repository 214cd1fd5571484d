//! JSON config schemas for the command-line surface. Every config carries a
//! mandatory seed; unknown keys are rejected so schema drift surfaces as a
//! config error.

use serde::{Deserialize, Serialize};

use crate::distributions::{SamplerKind, SamplerSpec};
use crate::symmat::SymMatrix;

/// Sampler description as written in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    /// One of: gaussian, cube, sphere, pareto_product, aubrun, basis_coupon,
    /// colored.
    pub kind: String,
    pub dim: usize,
    /// Tail index for pareto_product.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Base kind for colored (a non-colored kind name).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    /// Tail index of a pareto_product base.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_alpha: Option<f64>,
    /// Covariance matrix for colored, as rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<f64>>>,
    /// Known regularity parameters (C, eta), used by bound evaluations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_params: Option<(f64, f64)>,
}

fn simple_kind(name: &str, alpha: Option<f64>) -> Result<SamplerKind, String> {
    match name {
        "gaussian" => Ok(SamplerKind::Gaussian),
        "cube" => Ok(SamplerKind::Cube),
        "sphere" => Ok(SamplerKind::Sphere),
        "pareto_product" => {
            let alpha = alpha.ok_or("pareto_product requires \"alpha\"")?;
            Ok(SamplerKind::ParetoProduct { alpha })
        }
        "aubrun" => Ok(SamplerKind::Aubrun),
        "basis_coupon" => Ok(SamplerKind::BasisCoupon),
        other => Err(format!(
            "unknown sampler kind \"{other}\" (expected gaussian, cube, sphere, \
             pareto_product, aubrun, basis_coupon, colored)"
        )),
    }
}

impl SamplerConfig {
    pub fn build_kind(&self) -> Result<SamplerKind, String> {
        if self.kind == "colored" {
            let base_name = self.base.as_deref().ok_or("colored requires \"base\"")?;
            if base_name == "colored" {
                return Err("colored base must be a non-colored kind".into());
            }
            let base = simple_kind(base_name, self.base_alpha)?;
            let rows = self.sigma.clone().ok_or("colored requires \"sigma\"")?;
            let sigma = SymMatrix::try_from(rows).map_err(|e| format!("sigma: {e}"))?;
            Ok(SamplerKind::Colored { base: Box::new(base), sigma })
        } else {
            simple_kind(&self.kind, self.alpha)
        }
    }

    pub fn build_spec(&self) -> Result<SamplerSpec, String> {
        Ok(SamplerSpec {
            kind: self.build_kind()?,
            dim: self.dim,
            known_params: self.known_params,
        })
    }
}

/// Matrix source for the edges command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSource {
    /// One of: zeros, identity, diag, dense, file.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl MatrixSource {
    pub fn build(&self) -> Result<SymMatrix, String> {
        match self.kind.as_str() {
            "zeros" => {
                let dim = self.dim.ok_or("zeros requires \"dim\"")?;
                if dim == 0 {
                    return Err("dim must be >= 1".into());
                }
                Ok(SymMatrix::zeros(dim))
            }
            "identity" => {
                let dim = self.dim.ok_or("identity requires \"dim\"")?;
                if dim == 0 {
                    return Err("dim must be >= 1".into());
                }
                Ok(SymMatrix::identity(dim))
            }
            "diag" => {
                let values = self.values.as_ref().ok_or("diag requires \"values\"")?;
                SymMatrix::from_diag(values).map_err(|e| e.to_string())
            }
            "dense" => {
                let rows = self.rows.clone().ok_or("dense requires \"rows\"")?;
                SymMatrix::try_from(rows).map_err(|e| e.to_string())
            }
            "file" => {
                let path = self.path.as_ref().ok_or("file requires \"path\"")?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read matrix file {path}: {e}"))?;
                let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
                    .map_err(|e| format!("matrix file {path} is not a JSON array of rows: {e}"))?;
                SymMatrix::try_from(rows).map_err(|e| e.to_string())
            }
            other => Err(format!(
                "unknown matrix kind \"{other}\" (expected zeros, identity, diag, dense, file)"
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgesConfig {
    pub seed: u64,
    pub matrix: MatrixSource,
    pub phis: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfig {
    pub seed: u64,
    pub sampler: SamplerConfig,
    pub steps: usize,
    /// "lower" or "upper".
    pub side: String,
    pub phi: f64,
    /// Indicator threshold for lower walks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Split parameter for upper walks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub seed: u64,
    pub sampler: SamplerConfig,
    pub n_samples: usize,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_eps: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    /// Dimension-parametric sampler kind (colored is rejected).
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub eps: f64,
    pub n_values: Vec<usize>,
    pub trials: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailsConfig {
    pub seed: u64,
    /// One of: sr, wr, thin_shell.
    pub check: String,
    pub sampler: SamplerConfig,
    pub sample_count: usize,
    /// Projection rank for the sr check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    /// Moment exponent offset for the wr check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction_count: Option<usize>,
    /// Moment order for the thin-shell check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub seed: u64,
    /// "aubrun" (norm blow-up, square case) or "coupon" (rank failure).
    pub kind: String,
    /// Aubrun: the square sizes n = N. Coupon: the sample sizes N.
    pub sizes: Vec<usize>,
    pub trials: usize,
    /// Dimension for the coupon kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixednConfig {
    pub seed: u64,
    pub sampler: SamplerConfig,
    pub y_values: Vec<f64>,
    pub trials: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    pub seed: u64,
    pub tail_c: f64,
    pub eta: f64,
    pub eps: f64,
    pub sample_sizes: Vec<usize>,
    pub trials: usize,
    #[serde(default = "default_pareto_dim")]
    pub pareto_dim: usize,
    #[serde(default = "default_pareto_alpha")]
    pub pareto_alpha: f64,
}

fn default_pareto_dim() -> usize {
    16
}

fn default_pareto_alpha() -> f64 {
    4.5
}
