use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_alpha, DriveSignal, FieldMethod, ForwardError, Resolution, SpaceTimeField};
use crate::mittleff::{relax_primitive, relax_second_primitive};
use crate::quad::cumulative_trapezoid;
use crate::sl::{char_delta, solve_ivp_left, EigenSystem};

/// Default number of modes for the eigenfunction series.
pub const DEFAULT_MODES: usize = 64;

/// A kernel truncation whose bound exceeds this fraction of `sup |K|` is rejected.
const KERNEL_TAIL_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    /// Add `eta(t) (w(x) - sum_n e_n(x) e_n(1) / lambda_n)`, the quasi-static
    /// limit of the omitted modes, where `w` is the Green's function of `L(q)`
    /// for a unit flux at `x = 1`.
    pub tail_correction: bool,
    /// Largest accepted tail estimate relative to `max |u|`.
    pub tail_tolerance: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { tail_correction: true, tail_tolerance: 1e-3 }
    }
}

/// `K(x, t)` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTrace {
    pub x: f64,
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub n_modes: usize,
    /// Bound on `sup_t |K - K_truncated|`.
    pub tail_bound: f64,
}

/// Eigenvalue clamped at zero when it is a round-off negative.
fn mode_lambda(es: &EigenSystem, n: usize) -> f64 {
    let lam = es.lambdas[n];
    if lam < 0.0 && lam > -1e-9 {
        0.0
    } else {
        lam
    }
}

/// `sum_{n >= first} 1 / (n^2 pi^2 - c)` bounded by its first term plus the
/// integral of the rest; infinite if the lower bound is not positive.
fn reciprocal_tail(first: usize, c: f64) -> f64 {
    let n = first as f64;
    let root = c.max(0.0).sqrt();
    if PI * n <= root || first == 0 {
        return f64::INFINITY;
    }
    let head = 1.0 / (PI * PI * n * n - c.max(0.0));
    let integral = if root == 0.0 { 1.0 / (PI * PI * n) } else { ((PI * n + root) / (PI * n - root)).ln() / (2.0 * PI * root) };
    head + integral
}

/// A-priori bound on `sum_{n >= n_modes} |e_n(x) e_n(1)| / lambda_n` using
/// `|e_n(x) e_n(1)| <= 2` and `lambda_n >= n^2 pi^2 - max(q, 0)`.
fn a_priori_tail(es: &EigenSystem, n_modes: usize) -> f64 {
    2.0 * reciprocal_tail(n_modes, es.potential.max().max(0.0))
}

fn check_times(t_grid: &[f64], t_end: f64) -> Result<(), ForwardError> {
    if t_grid.is_empty() {
        return Err(ForwardError::IncompatibleGrids("empty time grid".into()));
    }
    if let Some(i) = t_grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(ForwardError::IncompatibleGrids(format!("time grid not increasing at index {}", i + 1)));
    }
    if t_grid[0] < 0.0 || *t_grid.last().unwrap() > t_end * (1.0 + 1e-12) {
        return Err(ForwardError::IncompatibleGrids(format!("time grid leaves the drive support [0, {t_end}]")));
    }
    Ok(())
}

/// Indices of `t_grid` on a uniform drive grid of step `tau`, if they all land on nodes.
fn node_indices(t_grid: &[f64], tau: f64) -> Option<Vec<usize>> {
    t_grid
        .iter()
        .map(|&t| {
            let k = (t / tau).round();
            ((t - k * tau).abs() <= 1e-9 * tau).then_some(k as usize)
        })
        .collect()
}

/// `c_n(t) = int_0^t s^(a-1) E_{a,a}(-lambda_n s^a) eta(t - s) ds` for every mode and time.
///
/// Integration by parts against the piecewise-linear drive gives
/// `c_n(t) = sum_j slope_j [Q(t - t_j) - Q(t - t_{j+1})]` with `Q` the second
/// relaxation primitive and negative arguments clamped to 0.
fn mode_coefficients(
    es: &EigenSystem,
    alpha: f64,
    eta: &DriveSignal,
    t_grid: &[f64],
    n_modes: usize,
) -> Result<Vec<Vec<f64>>, ForwardError> {
    let slopes = eta.slopes();
    let nodes = eta.t_grid();
    let uniform = eta.uniform_step().and_then(|tau| node_indices(t_grid, tau).map(|idx| (tau, idx)));
    (0..n_modes)
        .into_par_iter()
        .map(|n| -> Result<Vec<f64>, ForwardError> {
            let lam = mode_lambda(es, n);
            if let Some((tau, idx)) = &uniform {
                let top = idx.iter().copied().max().unwrap_or(0);
                let q: Vec<f64> =
                    (0..=top).map(|m| relax_second_primitive(alpha, lam, m as f64 * tau)).collect::<Result<_, _>>()?;
                let diff: Vec<f64> = (1..=top).map(|m| q[m] - q[m - 1]).collect();
                Ok(idx
                    .iter()
                    .map(|&i| (1..=i).map(|m| slopes[i - m] * diff[m - 1]).sum())
                    .collect())
            } else {
                t_grid
                    .iter()
                    .map(|&t| {
                        let mut acc = 0.0;
                        for (j, s) in slopes.iter().enumerate() {
                            if nodes[j] >= t {
                                break;
                            }
                            let upper = relax_second_primitive(alpha, lam, t - nodes[j])?;
                            let lower = relax_second_primitive(alpha, lam, (t - nodes[j + 1]).max(0.0))?;
                            acc += s * (upper - lower);
                        }
                        Ok(acc)
                    })
                    .collect()
            }
        })
        .collect()
}

/// Green's function `w(x)` for a unit flux at `x = 1`, and whether the zero
/// mode is excluded from it. `None` when no usable closed form exists.
fn quasi_static_profile(es: &EigenSystem, x_points: &[f64]) -> Result<Option<(Vec<f64>, bool)>, ForwardError> {
    let q = &es.potential;
    let robin = es.robin;
    if es.lambdas[0].abs() < 1e-9 {
        if q.max_abs() == 0.0 && robin.h == 0.0 && robin.big_h == 0.0 {
            return Ok(Some((x_points.iter().map(|x| 0.5 * x * x - 1.0 / 6.0).collect(), true)));
        }
        return Ok(None);
    }
    let zero = Complex64::new(0.0, 0.0);
    let d0 = char_delta(q, robin, zero)?.re;
    let phi = solve_ivp_left(q, robin.h, zero, q.grid_size())?;
    Ok(Some((x_points.iter().map(|&x| -phi.value_at(x).re / d0).collect(), false)))
}

fn check_x(x_points: &[f64]) -> Result<(), ForwardError> {
    if x_points.is_empty() {
        return Err(ForwardError::IncompatibleGrids("no x points".into()));
    }
    match x_points.iter().find(|x| !(**x >= 0.0 && **x <= 1.0)) {
        Some(x) => Err(ForwardError::IncompatibleGrids(format!("x = {x} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// Eigenfunction-series solution with [`SpectralOptions::default`].
pub fn solve_spectral(
    es: &EigenSystem,
    alpha: f64,
    eta: &DriveSignal,
    x_points: &[f64],
    t_grid: &[f64],
) -> Result<SpaceTimeField, ForwardError> {
    solve_spectral_with(es, alpha, eta, x_points, t_grid, SpectralOptions::default())
}

pub fn solve_spectral_with(
    es: &EigenSystem,
    alpha: f64,
    eta: &DriveSignal,
    x_points: &[f64],
    t_grid: &[f64],
    opts: SpectralOptions,
) -> Result<SpaceTimeField, ForwardError> {
    check_alpha(alpha)?;
    check_x(x_points)?;
    check_times(t_grid, eta.t_end())?;
    let n_modes = es.len();
    let coeffs = mode_coefficients(es, alpha, eta, t_grid, n_modes)?;
    let weights: Vec<Vec<f64>> =
        x_points.iter().map(|&x| (0..n_modes).map(|n| es.e(n, x) * es.e_at_one(n)).collect()).collect();

    let partial = |modes: usize| -> Vec<Vec<f64>> {
        weights
            .iter()
            .map(|w| {
                (0..t_grid.len())
                    .map(|k| {
                        let mut acc = 0.0;
                        for n in 0..modes {
                            acc += coeffs[n][k] * w[n];
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    };

    let profile = if opts.tail_correction { quasi_static_profile(es, x_points)? } else { None };
    let eta_t: Vec<f64> = t_grid.iter().map(|&t| eta.eval(t)).collect();
    let corrected = |modes: usize, profile: &(Vec<f64>, bool)| -> Vec<Vec<f64>> {
        let (w_full, skip_zero) = profile;
        let mut u = partial(modes);
        for (i, row) in u.iter_mut().enumerate() {
            let start = usize::from(*skip_zero);
            let mut resid = w_full[i];
            for n in start..modes {
                resid -= weights[i][n] / mode_lambda(es, n);
            }
            for (k, v) in row.iter_mut().enumerate() {
                *v += eta_t[k] * resid;
            }
        }
        u
    };

    let (values, tail_corrected, tail_bound) = match &profile {
        Some(p) => {
            let u = corrected(n_modes, p);
            // A-posteriori estimate from the change between n/2 and n modes.
            let coarse = corrected((n_modes / 2).max(1), p);
            let diff = u
                .iter()
                .flatten()
                .zip(coarse.iter().flatten())
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            (u, true, diff)
        }
        None => (partial(n_modes), false, eta.max_abs() * a_priori_tail(es, n_modes)),
    };
    let field = SpaceTimeField {
        x_grid: x_points.to_vec(),
        t_grid: t_grid.to_vec(),
        values,
        method: FieldMethod::Spectral,
        resolution: Resolution::Modes { n_modes, tail_corrected, tail_bound },
    };
    let tolerance = opts.tail_tolerance * field.max_abs();
    if tail_bound > tolerance {
        return Err(ForwardError::TruncationTooCoarse { tail_bound, tolerance });
    }
    Ok(field)
}

/// `K(x, t) = sum_{n < n_modes} e_n(x) e_n(1) int_0^t s^(a-1) E_{a,a}(-lambda_n s^a) ds`.
pub fn kernel_k(
    es: &EigenSystem,
    alpha: f64,
    x: f64,
    t_grid: &[f64],
    n_modes: usize,
) -> Result<KernelTrace, ForwardError> {
    check_alpha(alpha)?;
    check_x(&[x])?;
    if n_modes == 0 || n_modes > es.len() {
        return Err(ForwardError::TooManyModes { requested: n_modes, available: es.len() });
    }
    if t_grid.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(ForwardError::IncompatibleGrids("kernel times must be finite and >= 0".into()));
    }
    let per_mode: Vec<Vec<f64>> = (0..n_modes)
        .into_par_iter()
        .map(|n| {
            let w = es.e(n, x) * es.e_at_one(n);
            let lam = mode_lambda(es, n);
            t_grid.iter().map(|&t| relax_primitive(alpha, lam, t).map(|p| w * p)).collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let values: Vec<f64> = (0..t_grid.len()).map(|k| per_mode.iter().map(|m| m[k]).sum()).collect();
    let tail_bound = a_priori_tail(es, n_modes);
    let sup = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(tail_bound <= KERNEL_TAIL_FRACTION * sup.max(f64::MIN_POSITIVE)) {
        return Err(ForwardError::TruncationTooCoarse { tail_bound, tolerance: KERNEL_TAIL_FRACTION * sup });
    }
    Ok(KernelTrace { x, t_grid: t_grid.to_vec(), values, n_modes, tail_bound })
}

/// `max_t |int_0^t u(x, s) ds - (K(x, .) * eta)(t)|`.
///
/// Both sides use the trapezoid rule on the shared time grid. The field must
/// be an uncorrected spectral field with the kernel's mode count, so both
/// sides truncate the series identically.
pub fn duhamel_residual(field: &SpaceTimeField, kernel: &KernelTrace, eta: &DriveSignal) -> Result<f64, ForwardError> {
    match field.resolution {
        Resolution::Modes { n_modes, tail_corrected: false, .. } if field.method == FieldMethod::Spectral => {
            if n_modes != kernel.n_modes {
                return Err(ForwardError::IncompatibleGrids(format!(
                    "field uses {n_modes} modes, kernel {}",
                    kernel.n_modes
                )));
            }
        }
        _ => {
            return Err(ForwardError::IncompatibleGrids(
                "Duhamel check needs an uncorrected spectral field".into(),
            ))
        }
    }
    let t = &field.t_grid;
    if t.len() != kernel.t_grid.len() || t.iter().zip(&kernel.t_grid).any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0)) {
        return Err(ForwardError::IncompatibleGrids("field and kernel time grids differ".into()));
    }
    if t[0] != 0.0 {
        return Err(ForwardError::IncompatibleGrids("time grid must start at 0".into()));
    }
    let row = field
        .x_grid
        .iter()
        .position(|&x| (x - kernel.x).abs() <= 1e-12)
        .ok_or_else(|| ForwardError::IncompatibleGrids(format!("field has no column at x = {}", kernel.x)))?;
    let lhs = cumulative_trapezoid(t, &field.values[row]);
    let mut worst = 0.0_f64;
    for i in 1..t.len() {
        let mut conv = 0.0;
        for j in 1..=i {
            let a = kernel.values[j - 1] * eta.eval(t[i] - t[j - 1]);
            let b = kernel.values[j] * eta.eval(t[i] - t[j]);
            conv += 0.5 * (t[j] - t[j - 1]) * (a + b);
        }
        worst = worst.max((lhs[i] - conv).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl::{eigen_system, PotentialSpec, RobinPair};

    fn free_system(n: usize) -> EigenSystem {
        eigen_system(&PotentialSpec::zero(512), RobinPair::neumann(), n).unwrap()
    }

    #[test]
    fn zero_drive_gives_zero_field() {
        let es = free_system(8);
        let eta = DriveSignal::uniform(1.0, 64, |_| 0.0, "zero").unwrap();
        let f = solve_spectral(&es, 0.5, &eta, &[0.0, 0.5, 1.0], eta.t_grid()).unwrap();
        assert!(f.values.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn field_is_linear_in_drive() {
        let es = eigen_system(&PotentialSpec::from_fn(256, |x| -x).unwrap(), RobinPair::new(0.5, 1.0).unwrap(), 32).unwrap();
        let eta = DriveSignal::uniform(1.0, 100, |t| t * (1.5 - t), "bump").unwrap();
        let xs = [0.2, 0.9];
        let a = solve_spectral(&es, 0.6, &eta, &xs, eta.t_grid()).unwrap();
        let b = solve_spectral(&es, 0.6, &eta.scaled(2.0), &xs, eta.t_grid()).unwrap();
        for (u, v) in a.values.iter().flatten().zip(b.values.iter().flatten()) {
            assert!((2.0 * u - v).abs() <= 1e-12 * v.abs().max(1e-3));
        }
    }

    #[test]
    fn uniform_and_general_paths_agree() {
        let es = free_system(12);
        let eta = DriveSignal::uniform(1.0, 40, |t| t * t, "t^2").unwrap();
        let nodes = [0.0, 0.25, 0.5, 1.0];
        let off = [0.0, 0.26, 0.5, 1.0];
        let opts = SpectralOptions { tail_correction: false, tail_tolerance: f64::INFINITY };
        let a = solve_spectral_with(&es, 0.5, &eta, &[0.7], &nodes, opts).unwrap();
        let b = solve_spectral_with(&es, 0.5, &eta, &[0.7], &off, opts).unwrap();
        for k in [0, 2, 3] {
            assert!((a.values[0][k] - b.values[0][k]).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_vanishes_at_zero_and_zero_mode_is_power_law() {
        let es = free_system(10);
        let t = [0.0, 0.5, 2.0];
        let k = kernel_k(&es, 0.5, 0.3, &t, 11).unwrap();
        assert_eq!(k.values[0], 0.0);
        let zero_mode = kernel_k(&es.truncated(0), 0.5, 0.3, &t, 1).unwrap();
        for (i, &ti) in t.iter().enumerate() {
            let want = ti.sqrt() / libm::tgamma(1.5);
            assert!((zero_mode.values[i] - want).abs() < 1e-12);
        }
        assert!(matches!(kernel_k(&es, 0.5, 0.3, &t, 12), Err(ForwardError::TooManyModes { .. })));
    }

    #[test]
    fn reciprocal_tail_bounds_the_sum() {
        for &(first, c) in &[(5usize, 0.0), (10, 3.0), (40, 50.0)] {
            let exact: f64 = (first..200_000).map(|n| 1.0 / ((n as f64 * PI).powi(2) - c)).sum();
            let b = reciprocal_tail(first, c);
            assert!(b >= exact && b < 1.2 * exact + 1e-6, "{first} {c}: {b} vs {exact}");
        }
    }
}
