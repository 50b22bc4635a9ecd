use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ivp::{left_end, propagate, right_end, uniform_nodes, ShotEnd};
use super::{hermite, PotentialSpec, RobinPair, SlError};
use crate::quad::trapezoid_corrected;
use crate::roots::brent;

/// Relative residual tolerance on `|Delta(lambda_n)|`.
const RESIDUAL_TOL: f64 = 1e-8;
const MAX_BRACKET_ITERS: usize = 200;

/// Eigenvalues and orthonormal eigenfunctions of `L(q)` with Robin data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenSystem {
    pub lambdas: Vec<f64>,
    /// `e_n` sampled on the shooting grid, unit L2 norm, `e_n(0) > 0`.
    pub efuncs: Vec<Vec<f64>>,
    /// `e_n'` on the same grid.
    pub dfuncs: Vec<Vec<f64>>,
    /// Norming constants `k_n = 1 / phi_n(1)`.
    pub k: Vec<f64>,
    /// `beta_n = int_0^1 phi_n^2`.
    pub beta: Vec<f64>,
    pub n_max: usize,
    /// `|Delta(lambda_n)|` after refinement.
    pub residuals: Vec<f64>,
    pub robin: RobinPair,
    /// The potential the modes belong to.
    pub potential: PotentialSpec,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn grid_size(&self) -> usize {
        self.efuncs.first().map_or(0, |e| e.len() - 1)
    }

    /// `e_n(x)` by cubic Hermite interpolation.
    pub fn e(&self, n: usize, x: f64) -> f64 {
        hermite(&self.efuncs[n], &self.dfuncs[n], x)
    }

    /// `e_n(1)`.
    pub fn e_at_one(&self, n: usize) -> f64 {
        *self.efuncs[n].last().expect("nonempty eigenfunction")
    }

    /// Keeps only the first `n + 1` modes.
    pub fn truncated(&self, n_max: usize) -> Self {
        let m = (n_max + 1).min(self.len());
        Self {
            lambdas: self.lambdas[..m].to_vec(),
            efuncs: self.efuncs[..m].to_vec(),
            dfuncs: self.dfuncs[..m].to_vec(),
            k: self.k[..m].to_vec(),
            beta: self.beta[..m].to_vec(),
            n_max: m - 1,
            residuals: self.residuals[..m].to_vec(),
            robin: self.robin,
            potential: self.potential.clone(),
        }
    }

    /// Number of sign changes of `e_n` on the interior grid nodes.
    pub fn sign_changes(&self, n: usize) -> usize {
        let e = &self.efuncs[n];
        let inner = &e[1..e.len() - 1];
        let mut last = 0.0_f64;
        let mut count = 0;
        for &v in inner {
            if v != 0.0 {
                if last != 0.0 && v.signum() != last.signum() {
                    count += 1;
                }
                last = v;
            }
        }
        count
    }

    /// `max |int e_m e_n - delta_mn|` over all computed pairs.
    pub fn orthonormality_defect(&self) -> f64 {
        let m = self.len();
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in i..m {
                let prod: Vec<f64> = self.efuncs[i].iter().zip(&self.efuncs[j]).map(|(a, b)| a * b).collect();
                let n = prod.len() - 1;
                let d0 = self.dfuncs[i][0] * self.efuncs[j][0] + self.efuncs[i][0] * self.dfuncs[j][0];
                let d1 = self.dfuncs[i][n] * self.efuncs[j][n] + self.efuncs[i][n] * self.dfuncs[j][n];
                let v = trapezoid_corrected(&prod, d0, d1, 1.0);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }
}

/// Solver options for [`eigen_system_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct EigenOptions {
    /// Solve even when some `q > 0`.
    pub allow_inadmissible: bool,
}

/// `Delta(lambda) = -phi'(1; lambda) - H phi(1; lambda)`.
pub fn char_delta(q: &PotentialSpec, robin: RobinPair, lambda: Complex64) -> Result<Complex64, SlError> {
    if lambda.im == 0.0 {
        let end = left_end(q, robin.h, lambda.re, 1.0)?;
        Ok(Complex64::new(-end.dy - robin.big_h * end.y, 0.0))
    } else {
        let end = left_end(q, robin.h, lambda, 1.0)?;
        Ok(-end.dy - end.y * robin.big_h)
    }
}

/// Centered difference `(Delta(l + s) - Delta(l - s)) / (2s)` on the real
/// axis, with `s = rel_step * |l|` but never below `floor`.
pub fn char_delta_derivative(
    q: &PotentialSpec,
    robin: RobinPair,
    lambda: f64,
    rel_step: f64,
    floor: f64,
) -> Result<f64, SlError> {
    let s = (rel_step * lambda.abs()).max(floor);
    let at = |l: f64| char_delta(q, robin, Complex64::new(l, 0.0)).map(|z| z.re);
    Ok((at(lambda + s)? - at(lambda - s)?) / (2.0 * s))
}

/// A shooting eigenproblem: eigenvalue `n` is where the Prüfer angle at the
/// far end reaches `target + n pi`.
#[derive(Clone, Copy)]
enum Problem<'a> {
    Full { q: &'a PotentialSpec, robin: RobinPair },
    SplitLeft { q: &'a PotentialSpec, h: f64, x0: f64 },
    SplitRight { q: &'a PotentialSpec, big_h: f64, x0: f64 },
}

struct Probe {
    /// Number of eigenvalues strictly below the probe.
    below: usize,
    /// Characteristic function (sign changes exactly at eigenvalues).
    residual: f64,
}

fn count_below(end: &ShotEnd<f64>, target: f64) -> usize {
    let excess = end.theta - target;
    if excess <= 0.0 {
        0
    } else {
        (excess / PI).ceil() as usize
    }
}

impl Problem<'_> {
    fn probe(&self, lam: f64) -> Result<Probe, SlError> {
        match *self {
            Problem::Full { q, robin } => {
                let end = left_end(q, robin.h, lam, 1.0)?;
                let target = end.omega.atan2(-robin.big_h);
                Ok(Probe { below: count_below(&end, target), residual: -end.dy - robin.big_h * end.y })
            }
            Problem::SplitLeft { q, h, x0 } => {
                let end = left_end(q, h, lam, x0)?;
                Ok(Probe { below: count_below(&end, PI), residual: end.y })
            }
            Problem::SplitRight { q, big_h, x0 } => {
                let end = right_end(q, big_h, lam, x0)?;
                Ok(Probe { below: count_below(&end, PI), residual: end.y })
            }
        }
    }

    fn q(&self) -> &PotentialSpec {
        match self {
            Problem::Full { q, .. } | Problem::SplitLeft { q, .. } | Problem::SplitRight { q, .. } => q,
        }
    }

    /// Interval length, used for the a-priori upper bound.
    fn length(&self) -> f64 {
        match *self {
            Problem::Full { .. } => 1.0,
            Problem::SplitLeft { x0, .. } => x0,
            Problem::SplitRight { x0, .. } => 1.0 - x0,
        }
    }

    /// Isolates eigenvalue `n` by oscillation counting, then refines it on the
    /// characteristic function.
    fn solve_mode(&self, n: usize, n_max: usize) -> Result<(f64, f64), SlError> {
        let q = self.q();
        let mut lo = -q.max().max(0.0) - 1.0;
        let ell = self.length();
        let mut hi = ((n_max + 2) as f64 * PI / ell).powi(2) + q.max_abs() + 1.0;
        let mut p_lo = self.probe(lo)?;
        let mut p_hi = self.probe(hi)?;
        // Grow the upper bound for non-admissible data with large Robin terms.
        let mut grow = 0;
        while p_hi.below <= n {
            hi *= 2.0;
            p_hi = self.probe(hi)?;
            grow += 1;
            if grow > 20 {
                return Err(SlError::BracketFailure { index: n, lo, hi });
            }
        }
        while p_lo.below > n {
            lo = 2.0 * lo - 1.0;
            p_lo = self.probe(lo)?;
            grow += 1;
            if grow > 40 {
                return Err(SlError::BracketFailure { index: n, lo, hi });
            }
        }
        let mut iters = 0;
        while !(p_lo.below == n && p_hi.below == n + 1) {
            iters += 1;
            if iters > MAX_BRACKET_ITERS || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
                return Err(SlError::BracketFailure { index: n, lo, hi });
            }
            let mid = 0.5 * (lo + hi);
            let p = self.probe(mid)?;
            if p.below <= n {
                lo = mid;
                p_lo = p;
            } else {
                hi = mid;
                p_hi = p;
            }
        }
        let xtol = 1e-15 * hi.abs().max(1.0);
        let found = brent(|x| self.probe(x).map(|p| p.residual), lo, hi, p_lo.residual, p_hi.residual, xtol, 200)?;
        found.ok_or(SlError::BracketFailure { index: n, lo, hi })
    }

    fn spectrum(&self, n_max: usize) -> Result<Vec<(f64, f64)>, SlError> {
        (0..=n_max).into_par_iter().map(|n| self.solve_mode(n, n_max)).collect()
    }
}

fn check_admissible(q: &PotentialSpec, opts: EigenOptions) -> Result<(), SlError> {
    if !opts.allow_inadmissible && !q.is_admissible() {
        return Err(SlError::NotAdmissible);
    }
    if q.grid_size() < 16 {
        return Err(SlError::GridTooCoarse(q.grid_size()));
    }
    Ok(())
}

/// Modes `0..=n_max` of `L(q)` with default options.
pub fn eigen_system(q: &PotentialSpec, robin: RobinPair, n_max: usize) -> Result<EigenSystem, SlError> {
    eigen_system_with(q, robin, n_max, EigenOptions::default())
}

pub fn eigen_system_with(
    q: &PotentialSpec,
    robin: RobinPair,
    n_max: usize,
    opts: EigenOptions,
) -> Result<EigenSystem, SlError> {
    check_admissible(q, opts)?;
    let problem = Problem::Full { q, robin };
    let roots = problem.spectrum(n_max)?;
    let nodes = uniform_nodes(q.grid_size());

    let modes: Vec<_> = roots
        .par_iter()
        .enumerate()
        .map(|(n, &(lam, _))| -> Result<_, SlError> {
            let mut phi = Vec::with_capacity(nodes.len());
            let mut dphi = Vec::with_capacity(nodes.len());
            let end = propagate(q, lam, &nodes, (1.0, robin.h), |_, y, dy| {
                phi.push(y);
                dphi.push(dy);
            })?;
            let delta = -end.dy - robin.big_h * end.y;
            let scale = 1.0 + end.dy.abs() + robin.big_h * end.y.abs() + lam.abs().sqrt() * end.y.abs();
            let tolerance = RESIDUAL_TOL * scale;
            if delta.abs() > tolerance {
                return Err(SlError::ResidualTooLarge { index: n, residual: delta.abs(), tolerance });
            }
            let sq: Vec<f64> = phi.iter().map(|v| v * v).collect();
            let last = phi.len() - 1;
            let beta = trapezoid_corrected(&sq, 2.0 * phi[0] * dphi[0], 2.0 * phi[last] * dphi[last], 1.0);
            let norm = beta.sqrt();
            let k = 1.0 / phi[last];
            let e: Vec<f64> = phi.iter().map(|v| v / norm).collect();
            let de: Vec<f64> = dphi.iter().map(|v| v / norm).collect();
            Ok((e, de, k, beta, delta.abs()))
        })
        .collect::<Result<_, _>>()?;

    let lambdas: Vec<f64> = roots.iter().map(|r| r.0).collect();
    if let Some(i) = lambdas.windows(2).position(|w| w[1] <= w[0]) {
        return Err(SlError::BracketFailure { index: i + 1, lo: lambdas[i], hi: lambdas[i + 1] });
    }
    let mut es = EigenSystem {
        lambdas,
        efuncs: Vec::with_capacity(modes.len()),
        dfuncs: Vec::with_capacity(modes.len()),
        k: Vec::with_capacity(modes.len()),
        beta: Vec::with_capacity(modes.len()),
        n_max,
        residuals: Vec::with_capacity(modes.len()),
        robin,
        potential: q.clone(),
    };
    for (e, de, k, beta, r) in modes {
        es.efuncs.push(e);
        es.dfuncs.push(de);
        es.k.push(k);
        es.beta.push(beta);
        es.residuals.push(r);
    }
    Ok(es)
}

/// First `n_max + 1` eigenvalues of the split problems: `(0, x0)` with Robin
/// `h` at 0 and Dirichlet at `x0`, and `(x0, 1)` with Dirichlet at `x0` and
/// Robin `H` at 1.
pub fn split_spectra(
    q: &PotentialSpec,
    x0: f64,
    robin: RobinPair,
    n_max: usize,
) -> Result<(Vec<f64>, Vec<f64>), SlError> {
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(SlError::PointOutOfRange(x0));
    }
    check_admissible(q, EigenOptions { allow_inadmissible: true })?;
    let left = Problem::SplitLeft { q, h: robin.h, x0 }.spectrum(n_max)?;
    let right = Problem::SplitRight { q, big_h: robin.big_h, x0 }.spectrum(n_max)?;
    Ok((left.into_iter().map(|r| r.0).collect(), right.into_iter().map(|r| r.0).collect()))
}
