//! Robin Sturm-Liouville problems for `L(q) u = -u'' - q u` on `(0, 1)` with
//! `u'(0) - h u(0) = 0` and `u'(1) + H u(1) = 0`.
//!
//! The split problems on `(0, x0)` and `(x0, 1)` use the same operator sign
//! convention, with a Dirichlet condition at `x0`.

mod asymptotics;
mod eigen;
mod ivp;
mod potential;

use thiserror::Error;

pub use asymptotics::{verify_asymptotics, verify_split_asymptotics, AsymptoticsReport};
pub use eigen::{char_delta, char_delta_derivative, eigen_system, eigen_system_with, split_spectra, EigenOptions, EigenSystem};
pub use ivp::{solve_ivp_left, solve_ivp_right, Scalar, Side, SolutionTrace, ODE_TOL, OVERFLOW_GUARD};
pub use potential::{Interpolation, PotentialSpec, RobinPair, DEFAULT_GRID};

pub(crate) use ivp::{hermite, left_end};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SlError {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("Robin coefficients must be finite and nonnegative (h = {h}, H = {big_h})")]
    InvalidRobin { h: f64, big_h: f64 },
    #[error("shooting grid of {0} intervals is too coarse (need at least 16)")]
    GridTooCoarse(usize),
    #[error("trajectory magnitude {magnitude:e} exceeded the overflow guard at x = {x}")]
    NonFiniteBlowup { x: f64, magnitude: f64 },
    #[error("could not isolate eigenvalue index {index} in [{lo}, {hi}]")]
    BracketFailure { index: usize, lo: f64, hi: f64 },
    #[error("eigenvalue {index} residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { index: usize, residual: f64, tolerance: f64 },
    #[error("potential is not admissible (some q > 0) and no override was given")]
    NotAdmissible,
    #[error("observation point {0} must lie in (0, 1)")]
    PointOutOfRange(f64),
    #[error("need at least {needed} modes, have {have}")]
    InsufficientModes { needed: usize, have: usize },
}
