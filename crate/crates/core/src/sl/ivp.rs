//! Initial-value problems for `-y'' - q y = lambda y`.
//!
//! Integration uses the fourth-order Magnus exponential on each grid cell. The
//! propagator is exact for piecewise-constant coefficients and unimodular, so
//! the Wronskian of two solutions sharing a potential is conserved to
//! round-off. Cells are subdivided from a local frequency and slope estimate so
//! the per-step error stays below the configured relative tolerance.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use super::{PotentialSpec, SlError};

/// Relative local-error tolerance of the integrator.
pub const ODE_TOL: f64 = 1e-11;
/// Magnitude above which a trajectory is treated as overflowing.
pub const OVERFLOW_GUARD: f64 = 1e150;

const SQRT3_12: f64 = 0.144_337_567_297_406_43; // sqrt(3) / 12
const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // sqrt(3) / 6
/// Largest phase advance (in radians) allowed in one substep.
const MAX_PHASE_STEP: f64 = 0.5;

/// Scalars the propagator can run on: real for eigenvalue search, complex
/// for the Weyl-function machinery.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
{
    fn from_real(v: f64) -> Self;
    fn modulus(self) -> f64;
    /// `(cosh(sqrt(z)), sinh(sqrt(z)) / sqrt(z))`, entire in `z`.
    fn cosh_sinhc(z: Self) -> (Self, Self);
    /// Prüfer angle `atan2(omega * y, dy)`, real scalars only.
    fn prufer(y: Self, dy: Self, omega: f64) -> Option<f64>;
}

#[inline]
fn small_cosh_sinhc<T: Scalar>(z: T) -> (T, T) {
    let z2 = z * z;
    let z3 = z2 * z;
    let z4 = z2 * z2;
    let c = T::from_real(1.0) + z * 0.5 + z2 * (1.0 / 24.0) + z3 * (1.0 / 720.0) + z4 * (1.0 / 40320.0);
    let s = T::from_real(1.0) + z * (1.0 / 6.0) + z2 * (1.0 / 120.0) + z3 * (1.0 / 5040.0) + z4 * (1.0 / 362_880.0);
    (c, s)
}

impl Scalar for f64 {
    #[inline]
    fn from_real(v: f64) -> Self {
        v
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn cosh_sinhc(z: f64) -> (f64, f64) {
        if z.abs() < 1e-3 {
            small_cosh_sinhc(z)
        } else if z > 0.0 {
            let s = z.sqrt();
            (s.cosh(), s.sinh() / s)
        } else {
            let s = (-z).sqrt();
            let (sn, cs) = s.sin_cos();
            (cs, sn / s)
        }
    }
    #[inline]
    fn prufer(y: f64, dy: f64, omega: f64) -> Option<f64> {
        Some((omega * y).atan2(dy))
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn from_real(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn cosh_sinhc(z: Complex64) -> (Complex64, Complex64) {
        if z.norm() < 1e-3 {
            small_cosh_sinhc(z)
        } else {
            let s = z.sqrt();
            (s.cosh(), s.sinh() / s)
        }
    }
    #[inline]
    fn prufer(_: Complex64, _: Complex64, _: f64) -> Option<f64> {
        None
    }
}

/// Which end the initial data sits at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `phi(0) = 1`, `phi'(0) = h`.
    Left,
    /// `psi(1) = 1`, `psi'(1) = -H`.
    Right,
}

/// Values and first derivatives of an IVP solution on a uniform grid over `[0, 1]`.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    pub lambda: Complex64,
    pub values: Vec<Complex64>,
    pub derivs: Vec<Complex64>,
    pub side: Side,
}

impl SolutionTrace {
    pub fn grid_size(&self) -> usize {
        self.values.len() - 1
    }

    /// Cubic Hermite interpolation of the value at `x`.
    pub fn value_at(&self, x: f64) -> Complex64 {
        hermite(&self.values, &self.derivs, x)
    }

    /// Linear interpolation of the derivative samples.
    pub fn deriv_at(&self, x: f64) -> Complex64 {
        let n = self.grid_size();
        let s = x.clamp(0.0, 1.0) * n as f64;
        let i = (s.floor() as usize).min(n - 1);
        let t = s - i as f64;
        self.derivs[i] * (1.0 - t) + self.derivs[i + 1] * t
    }
}

/// Cubic Hermite interpolation on a uniform grid over `[0, 1]`.
pub(crate) fn hermite<T: Scalar>(values: &[T], derivs: &[T], x: f64) -> T {
    let n = values.len() - 1;
    let h = 1.0 / n as f64;
    let s = x.clamp(0.0, 1.0) * n as f64;
    let i = (s.floor() as usize).min(n - 1);
    let t = s - i as f64;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    values[i] * h00 + derivs[i] * (h10 * h) + values[i + 1] * h01 + derivs[i + 1] * (h11 * h)
}

/// End state of a propagation.
#[derive(Debug, Clone, Copy)]
pub struct ShotEnd<T> {
    pub y: T,
    pub dy: T,
    /// Unwrapped Prüfer angle at the end point (real scalars only). The angle is
    /// measured in the direction of travel, so it starts in `(0, pi/2]` for
    /// nonnegative Robin data and increases through each zero of `y`.
    pub theta: f64,
    pub omega: f64,
}

/// Number of substeps for a cell of length `len` with `|lambda + q| <= kappa`
/// and potential slope `slope`.
#[inline]
fn substeps(len: f64, kappa: f64, slope: f64) -> usize {
    let by_phase = len * kappa.sqrt() / MAX_PHASE_STEP;
    // Leading Magnus-4 remainder scales like k^5 (|q'| sqrt(kappa) + q'^2) / 240.
    let err_coeff = (slope * (kappa + 1.0).sqrt() + slope * slope) / 240.0;
    let by_error = if err_coeff > 0.0 { len * (err_coeff / ODE_TOL).powf(0.25) } else { 0.0 };
    (by_phase.max(by_error).ceil() as usize).max(1)
}

/// Propagates `(y, y')` through the monotone node list, calling `on_node` at
/// every node (including the first) with the node index and state.
pub(crate) fn propagate<T: Scalar>(
    q: &PotentialSpec,
    lambda: T,
    nodes: &[f64],
    y0: (T, T),
    mut on_node: impl FnMut(usize, T, T),
) -> Result<ShotEnd<T>, SlError> {
    let lam_mod = lambda.modulus();
    let omega = lam_mod.max(1.0).sqrt();
    let qmax = q.max_abs();
    let slope = q.max_slope();
    let backward = nodes.len() > 1 && nodes[nodes.len() - 1] < nodes[0];
    let dir = if backward { -1.0 } else { 1.0 };

    let (mut y, mut dy) = y0;
    on_node(0, y, dy);
    let mut raw = T::prufer(y, dy * dir, omega);
    let mut theta = raw.unwrap_or(0.0);

    for (idx, w) in nodes.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let len = (b - a).abs();
        let m = substeps(len, lam_mod + qmax, slope);
        let k = (b - a) / m as f64;
        for j in 0..m {
            let x0 = a + k * j as f64;
            let x1 = x0 + k * (0.5 - GAUSS_OFFSET);
            let x2 = x0 + k * (0.5 + GAUSS_OFFSET);
            let (q1, q2) = (q.eval(x1), q.eval(x2));
            let kappa_bar = lambda + T::from_real(0.5 * (q1 + q2));
            let delta = SQRT3_12 * k * k * (q2 - q1);
            // Omega = [[delta, k], [-k kappa_bar, -delta]]; exp(Omega) = C I + S Omega.
            let z = kappa_bar * (-k * k) + T::from_real(delta * delta);
            let (c, s) = T::cosh_sinhc(z);
            let sd = s * delta;
            let ny = (c + sd) * y + s * k * dy;
            let ndy = -(s * kappa_bar * k) * y + (c - sd) * dy;
            y = ny;
            dy = ndy;
            if let Some(prev) = raw {
                let cur = T::prufer(y, dy * dir, omega).expect("real scalar");
                let mut d = cur - prev;
                if d > std::f64::consts::PI {
                    d -= std::f64::consts::TAU;
                } else if d <= -std::f64::consts::PI {
                    d += std::f64::consts::TAU;
                }
                theta += d;
                raw = Some(cur);
            }
        }
        let mag = y.modulus().max(dy.modulus());
        if !(mag <= OVERFLOW_GUARD) {
            return Err(SlError::NonFiniteBlowup { x: b, magnitude: mag });
        }
        on_node(idx + 1, y, dy);
    }
    Ok(ShotEnd { y, dy, theta, omega })
}

/// Uniform nodes `i / n`, `i = 0..=n`.
pub(crate) fn uniform_nodes(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

fn check_grid(q: &PotentialSpec, grid_size: usize) -> Result<(), SlError> {
    if grid_size < 16 {
        return Err(SlError::GridTooCoarse(grid_size));
    }
    debug_assert!(q.samples().iter().all(|v| v.is_finite()));
    Ok(())
}

fn trace<T: Scalar + Into<Complex64>>(
    q: &PotentialSpec,
    lambda: T,
    grid_size: usize,
    side: Side,
    y0: (T, T),
) -> Result<SolutionTrace, SlError> {
    check_grid(q, grid_size)?;
    let mut nodes = uniform_nodes(grid_size);
    if side == Side::Right {
        nodes.reverse();
    }
    let mut values = vec![Complex64::new(0.0, 0.0); grid_size + 1];
    let mut derivs = values.clone();
    propagate(q, lambda, &nodes, y0, |i, y, dy| {
        let slot = if side == Side::Right { grid_size - i } else { i };
        values[slot] = y.into();
        derivs[slot] = dy.into();
    })?;
    Ok(SolutionTrace { lambda: lambda.into(), values, derivs, side })
}

/// `phi(x; lambda)` with `phi(0) = 1`, `phi'(0) = h` on a uniform grid of
/// `grid_size` intervals.
pub fn solve_ivp_left(
    q: &PotentialSpec,
    h: f64,
    lambda: Complex64,
    grid_size: usize,
) -> Result<SolutionTrace, SlError> {
    if lambda.im == 0.0 {
        trace(q, lambda.re, grid_size, Side::Left, (1.0, h))
    } else {
        trace(q, lambda, grid_size, Side::Left, (Complex64::from_real(1.0), Complex64::from_real(h)))
    }
}

/// `psi(x; lambda)` with `psi(1) = 1`, `psi'(1) = -H`.
pub fn solve_ivp_right(
    q: &PotentialSpec,
    big_h: f64,
    lambda: Complex64,
    grid_size: usize,
) -> Result<SolutionTrace, SlError> {
    if lambda.im == 0.0 {
        trace(q, lambda.re, grid_size, Side::Right, (1.0, -big_h))
    } else {
        trace(q, lambda, grid_size, Side::Right, (Complex64::from_real(1.0), Complex64::from_real(-big_h)))
    }
}

/// End values `(phi(x), phi'(x))` of the left IVP without storing the trace.
pub(crate) fn left_end<T: Scalar>(q: &PotentialSpec, h: f64, lambda: T, x: f64) -> Result<ShotEnd<T>, SlError> {
    let nodes = nodes_to(q.grid_size(), 0.0, x);
    propagate(q, lambda, &nodes, (T::from_real(1.0), T::from_real(h)), |_, _, _| {})
}

/// End values `(psi(x), psi'(x))` of the right IVP.
pub(crate) fn right_end<T: Scalar>(q: &PotentialSpec, big_h: f64, lambda: T, x: f64) -> Result<ShotEnd<T>, SlError> {
    let nodes = nodes_to(q.grid_size(), 1.0, x);
    propagate(q, lambda, &nodes, (T::from_real(1.0), T::from_real(-big_h)), |_, _, _| {})
}

/// Node list from `start` to `end` passing through every potential grid node
/// strictly between them.
pub(crate) fn nodes_to(grid_size: usize, start: f64, end: f64) -> Vec<f64> {
    let n = grid_size as f64;
    let (lo, hi) = if start <= end { (start, end) } else { (end, start) };
    let first = (lo * n).floor() as usize + 1;
    let mut nodes = vec![lo];
    for i in first..=grid_size {
        let x = i as f64 / n;
        if x >= hi - 1e-14 {
            break;
        }
        if x > lo + 1e-14 {
            nodes.push(x);
        }
    }
    nodes.push(hi);
    if start > end {
        nodes.reverse();
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn free_cosine_at_pi_squared() {
        let q = PotentialSpec::zero(64);
        let tr = solve_ivp_left(&q, 0.0, c(PI * PI), 64).unwrap();
        for (i, (v, d)) in tr.values.iter().zip(&tr.derivs).enumerate() {
            let x = i as f64 / 64.0;
            assert!((v.re - (PI * x).cos()).abs() < 1e-12);
            assert!((d.re + PI * (PI * x).sin()).abs() < 1e-11);
        }
        assert!((tr.values[64].re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_solution_at_zero_lambda() {
        let q = PotentialSpec::zero(32);
        let tr = solve_ivp_left(&q, 1.0, c(0.0), 32).unwrap();
        for (i, v) in tr.values.iter().enumerate() {
            assert!((v.re - (1.0 + i as f64 / 32.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn cosh_for_negative_unit_potential() {
        let q = PotentialSpec::constant(128, -1.0).unwrap();
        let tr = solve_ivp_left(&q, 0.0, c(0.0), 128).unwrap();
        assert!((tr.values[128].re - 1.0_f64.cosh()).abs() < 1e-12);
        assert!((tr.values[128].re - 1.543_080_6).abs() < 1e-7);
    }

    #[test]
    fn right_solutions_closed_forms() {
        let q = PotentialSpec::zero(64);
        let tr = solve_ivp_right(&q, 0.0, c(PI * PI), 64).unwrap();
        for (i, v) in tr.values.iter().enumerate() {
            let x = i as f64 / 64.0;
            assert!((v.re + (PI * x).cos()).abs() < 1e-12);
        }
        let tr = solve_ivp_right(&q, 0.0, c(0.0), 64).unwrap();
        assert!(tr.values.iter().all(|v| (v.re - 1.0).abs() < 1e-14));
        let tr = solve_ivp_right(&q, 2.0, c(0.0), 64).unwrap();
        assert!((tr.values[0].re - 3.0).abs() < 1e-13);
        assert_eq!(tr.values[64].re, 1.0);
        assert_eq!(tr.derivs[64].re, -2.0);
    }

    #[test]
    fn complex_lambda_matches_closed_form() {
        let q = PotentialSpec::zero(256);
        let lam = Complex64::new(3.0, 40.0);
        let tr = solve_ivp_left(&q, 0.0, lam, 256).unwrap();
        let r = lam.sqrt();
        for (i, v) in tr.values.iter().enumerate().step_by(17) {
            let x = i as f64 / 256.0;
            let exact = (r * x).cos();
            assert!((v - exact).norm() <= 1e-11 * exact.norm().max(1.0));
        }
    }

    #[test]
    fn grid_guard() {
        let q = PotentialSpec::zero(8);
        assert!(matches!(solve_ivp_left(&q, 0.0, c(1.0), 8), Err(SlError::GridTooCoarse(8))));
    }

    #[test]
    fn overflow_is_reported() {
        let q = PotentialSpec::zero(64);
        let err = solve_ivp_left(&q, 0.0, c(-1e6), 64).unwrap_err();
        assert!(matches!(err, SlError::NonFiniteBlowup { .. }));
    }

    #[test]
    fn prufer_angle_counts_zeros() {
        let q = PotentialSpec::zero(512);
        // cos(sqrt(lambda) x) with sqrt(lambda) = 7.5 pi has 7 zeros on (0, 1) plus a half turn.
        let end = left_end(&q, 0.0, (7.5 * PI).powi(2), 1.0).unwrap();
        assert!((end.theta - 8.0 * PI).abs() < 1e-9, "{}", end.theta);
    }

    #[test]
    fn node_list_through_interior_point() {
        let nodes = nodes_to(4, 0.0, 0.6);
        assert_eq!(nodes, vec![0.0, 0.25, 0.5, 0.6]);
        let nodes = nodes_to(4, 1.0, 0.6);
        assert_eq!(nodes, vec![1.0, 0.75, 0.6]);
    }

    #[test]
    fn hermite_is_exact_for_cubics() {
        let f = |x: f64| x * x * x - 2.0 * x;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let xs = uniform_nodes(5);
        let v: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let d: Vec<f64> = xs.iter().map(|&x| df(x)).collect();
        assert!((hermite(&v, &d, 0.37) - f(0.37)).abs() < 1e-14);
    }
}
