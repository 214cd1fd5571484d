//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error(
        "eigensolver did not converge: n = {dim}, off-diagonal norm {off_norm:.3e} \
         above target {target:.3e} after {sweeps} sweeps"
    )]
    EigenNoConvergence {
        dim: usize,
        off_norm: f64,
        target: f64,
        sweeps: usize,
    },

    #[error("near-singular resolvent: shift point {shift} within tolerance of eigenvalue {eigenvalue}")]
    NearSingularResolvent { shift: f64, eigenvalue: f64 },

    #[error("resolvent pole: denominator {0:.3e} within 1e-12 of zero")]
    ResolventPole(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("root finder did not converge: {0}")]
    RootFind(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
