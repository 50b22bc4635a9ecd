//! Time-fractional diffusion `d_t^a u = u_xx + q u` on `(0, 1)` with
//! `u_x(0) = h u(0)`, `u_x(1) + H u(1) = eta(t)` and zero initial state.
//!
//! Two independent solvers are provided: the eigenfunction series with
//! exact convolution against piecewise-linear drives, and an implicit L1
//! finite-difference scheme.

mod drive;
mod fd;
mod field;
mod spectral;

use thiserror::Error;

use crate::mittleff::MlError;
use crate::sl::SlError;

pub use drive::DriveSignal;
pub use fd::solve_l1_fd;
pub use field::{FieldMethod, Resolution, SpaceTimeField};
pub use spectral::{
    duhamel_residual, kernel_k, solve_spectral, solve_spectral_with, KernelTrace, SpectralOptions, DEFAULT_MODES,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ForwardError {
    #[error("mode truncation too coarse: tail estimate {tail_bound:e} exceeds {tolerance:e}")]
    TruncationTooCoarse { tail_bound: f64, tolerance: f64 },
    #[error("requested {requested} modes but only {available} are available")]
    TooManyModes { requested: usize, available: usize },
    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),
    #[error("tridiagonal solve failed at time step {step}, row {row}")]
    LinearSolveFailure { step: usize, row: usize },
    #[error("invalid drive signal: {0}")]
    InvalidDrive(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Sl(#[from] SlError),
}

pub(crate) fn check_alpha(alpha: f64) -> Result<(), ForwardError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(ForwardError::InvalidInput(format!("alpha = {alpha} not in (0, 1]")))
    }
}
