//! edgewalk: a numerical laboratory for soft spectral edges of random
//! matrices.
//!
//! The crate builds sample covariance matrices from isotropic samplers,
//! tracks their soft spectral edges through the lower and upper Stieltjes
//! transforms, certifies edge motion under rank-one updates with explicit
//! feasible shifts, and runs the Monte Carlo experiments that probe extreme
//! eigenvalues, minimal sample sizes, trace concentration, and the two
//! classical failure modes (norm blow-up and coupon-collector rank loss).

// Negated float comparisons like `!(phi > 0.0)` are deliberate: they reject
// NaN parameters, which `phi <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distributions;
pub mod error;
pub mod estimator;
pub mod rng;
pub mod shifts;
pub mod stats;
pub mod stieltjes;
pub mod symmat;

pub use error::{Error, Result};
