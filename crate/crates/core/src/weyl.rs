//! Weyl `m`-function, the two-potential Wronskian `U(x; lambda)`, truncated
//! spectral products and the quotient `F = U(d) / g^2`.
//!
//! Evaluations along complex rays are capped at `|lambda|^(1/2) <= 40`: the
//! solutions grow like `exp(|Im sqrt(lambda)| x)` and beyond that cap the
//! products needed here leave the double range.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sl::{char_delta, left_end, solve_ivp_left, PotentialSpec, RobinPair, SlError};

/// Largest `|lambda|^(1/2)` accepted on scan rays.
pub const MAX_SQRT_MODULUS: f64 = 40.0;
/// Relative guard below which denominators are treated as zero.
pub const POLE_GUARD: f64 = 1e-10;
/// Relative distance `|1 - lambda / lambda_n|` below which `F` is not evaluated directly.
pub const EIGEN_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum WeylError {
    #[error("phi({x}; {lambda}) is within the pole guard")]
    NearPole { x: f64, lambda: Complex64 },
    #[error("exponent fit failed: {0}")]
    FitFailure(String),
    #[error("retained eigenvalue {index} is zero")]
    ZeroEigenvalue { index: usize },
    #[error("lambda = {lambda} is within the guard distance of eigenvalue {eigenvalue}")]
    NearZeroDenominator { lambda: Complex64, eigenvalue: f64 },
    #[error("potentials differ on [{d}, 1]")]
    MismatchedTails { d: f64 },
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Sl(#[from] SlError),
}

/// `m_-(x, lambda) = -phi'(x; lambda) / phi(x; lambda)`.
pub fn weyl_m_minus(q: &PotentialSpec, h: f64, lambda: Complex64, x: f64) -> Result<Complex64, WeylError> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(WeylError::OutOfRange(format!("x = {x} not in (0, 1]")));
    }
    let end = left_end(q, h, lambda, x)?;
    let scale = end.y.norm() + end.dy.norm() / lambda.norm().max(1.0).sqrt();
    if end.y.norm() < POLE_GUARD * scale {
        return Err(WeylError::NearPole { x, lambda });
    }
    Ok(-end.dy / end.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RayDirection {
    ImaginaryAxis,
    /// `arg(lambda)` in radians.
    Sector(f64),
}

/// Sample points `|lambda| e^{i theta}` along a ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexRay {
    pub direction: RayDirection,
    pub magnitudes: Vec<f64>,
}

impl ComplexRay {
    pub fn new(direction: RayDirection, magnitudes: Vec<f64>) -> Result<Self, WeylError> {
        if magnitudes.is_empty() || magnitudes[0] <= 0.0 {
            return Err(WeylError::OutOfRange("ray magnitudes must be positive and nonempty".into()));
        }
        if magnitudes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(WeylError::OutOfRange("ray magnitudes must increase".into()));
        }
        let top = *magnitudes.last().unwrap();
        if top.sqrt() > MAX_SQRT_MODULUS {
            return Err(WeylError::OutOfRange(format!("|lambda| = {top} exceeds the overflow-safe cap")));
        }
        Ok(Self { direction, magnitudes })
    }

    /// Geometric sampling of `count` points on `[lo, hi]`.
    pub fn geometric(direction: RayDirection, lo: f64, hi: f64, count: usize) -> Result<Self, WeylError> {
        let count = count.max(2);
        let step = (hi / lo).ln() / (count - 1) as f64;
        Self::new(direction, (0..count).map(|i| lo * (step * i as f64).exp()).collect())
    }

    pub fn points(&self) -> Vec<Complex64> {
        let theta = match self.direction {
            RayDirection::ImaginaryAxis => 0.5 * PI,
            RayDirection::Sector(a) => a,
        };
        self.magnitudes.iter().map(|&r| Complex64::from_polar(r, theta)).collect()
    }
}

/// Power-law fit `|m| ~ c |lambda|^p` along a ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub coefficient: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    /// Exponent of the competing form `m ~ -i / sqrt(lambda)`, shown for comparison only.
    pub alternative_exponent: f64,
    pub samples: Vec<ScanPoint>,
}

/// One evaluated point of a complex scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub lambda: Complex64,
    pub value: Complex64,
}

/// CSV with header `re_lambda,im_lambda,re_value,im_value,magnitude`.
pub fn scan_to_csv(points: &[ScanPoint]) -> String {
    let mut out = String::from("re_lambda,im_lambda,re_value,im_value,magnitude\n");
    for p in points {
        out.push_str(&format!(
            "{:e},{:e},{:e},{:e},{:e}\n",
            p.lambda.re,
            p.lambda.im,
            p.value.re,
            p.value.im,
            p.value.norm()
        ));
    }
    out
}

/// Least-squares line through `(ln a, ln b)`; returns slope, intercept, rms residual.
pub(crate) fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64), WeylError> {
    if xs.len() < 2 {
        return Err(WeylError::FitFailure(format!("need at least two points, have {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(WeylError::FitFailure("nonpositive or non-finite samples".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(WeylError::FitFailure("all magnitudes coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok((slope, intercept, rms))
}

/// Fits `|m_-(x, lambda)| ~ c |lambda|^p` along `ray`.
pub fn m_asymptotic_scan(q: &PotentialSpec, h: f64, x: f64, ray: &ComplexRay) -> Result<ExponentFit, WeylError> {
    let samples: Vec<ScanPoint> = ray
        .points()
        .into_par_iter()
        .map(|lambda| weyl_m_minus(q, h, lambda, x).map(|value| ScanPoint { lambda, value }))
        .collect::<Result<_, _>>()?;
    let mags: Vec<f64> = samples.iter().map(|s| s.value.norm()).collect();
    let (exponent, intercept, residual) = log_log_fit(&ray.magnitudes, &mags)?;
    Ok(ExponentFit { exponent, coefficient: intercept.exp(), residual, alternative_exponent: -0.5, samples })
}

/// `|1/m_2 - 1/m_1|` along a ray, for two potentials (and Robin values) at `x`.
pub fn m_difference_scan(
    q1: &PotentialSpec,
    q2: &PotentialSpec,
    h1: f64,
    h2: f64,
    x: f64,
    ray: &ComplexRay,
) -> Result<Vec<ScanPoint>, WeylError> {
    ray.points()
        .into_par_iter()
        .map(|lambda| {
            let m1 = weyl_m_minus(q1, h1, lambda, x)?;
            let m2 = weyl_m_minus(q2, h2, lambda, x)?;
            Ok(ScanPoint { lambda, value: Complex64::new(1.0, 0.0) / m2 - Complex64::new(1.0, 0.0) / m1 })
        })
        .collect()
}

/// `U(x; lambda) = phi_1 phi_2' - phi_2 phi_1'` at one point.
pub fn wronskian_u(
    q1: &PotentialSpec,
    q2: &PotentialSpec,
    h1: f64,
    h2: f64,
    lambda: Complex64,
    x: f64,
) -> Result<Complex64, WeylError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(WeylError::OutOfRange(format!("x = {x} not in [0, 1]")));
    }
    let a = left_end(q1, h1, lambda, x)?;
    let b = left_end(q2, h2, lambda, x)?;
    Ok(a.y * b.dy - b.y * a.dy)
}

/// `U(x_i; lambda)` at every node of a uniform grid of `grid_size` intervals.
pub fn wronskian_profile(
    q1: &PotentialSpec,
    q2: &PotentialSpec,
    h1: f64,
    h2: f64,
    lambda: Complex64,
    grid_size: usize,
) -> Result<Vec<Complex64>, WeylError> {
    let a = solve_ivp_left(q1, h1, lambda, grid_size)?;
    let b = solve_ivp_left(q2, h2, lambda, grid_size)?;
    Ok((0..=grid_size).map(|i| a.values[i] * b.derivs[i] - b.values[i] * a.derivs[i]).collect())
}

/// A truncated product `prod (1 - lambda / lambda_n)` over retained eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSpec {
    pub spectrum: Vec<f64>,
    /// Number of leading entries of `spectrum` that enter the product.
    pub truncation: usize,
    /// Indices (into `spectrum`) left out of the product.
    #[serde(default)]
    pub exclusion: Vec<usize>,
    /// Multiply by `exp(-lambda sum_{n >= truncation} 1/(n^2 pi^2))`, the
    /// first-order contribution of omitted factors when `lambda_n ~ n^2 pi^2`.
    #[serde(default)]
    pub asymptotic_tail: bool,
}

impl ProductSpec {
    pub fn full(spectrum: Vec<f64>) -> Self {
        let truncation = spectrum.len();
        Self { spectrum, truncation, exclusion: Vec::new(), asymptotic_tail: false }
    }

    fn retained(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.spectrum[..self.truncation.min(self.spectrum.len())]
            .iter()
            .copied()
            .enumerate()
            .filter(|(i, _)| !self.exclusion.contains(i))
    }

    fn validate(&self) -> Result<(), WeylError> {
        if self.truncation > self.spectrum.len() {
            return Err(WeylError::OutOfRange(format!(
                "truncation {} exceeds spectrum length {}",
                self.truncation,
                self.spectrum.len()
            )));
        }
        for (i, l) in self.retained() {
            if l.abs() <= 1e-9 {
                return Err(WeylError::ZeroEigenvalue { index: i });
            }
        }
        Ok(())
    }
}

/// `sum_{n >= m} 1/n^2` by its Euler-Maclaurin expansion.
fn inverse_square_tail(m: usize) -> f64 {
    if m == 0 {
        return f64::INFINITY;
    }
    if m < 20 {
        let head: f64 = (m..20).map(|n| 1.0 / (n * n) as f64).sum();
        return head + inverse_square_tail(20);
    }
    let x = m as f64;
    1.0 / x + 0.5 / (x * x) + 1.0 / (6.0 * x.powi(3)) - 1.0 / (30.0 * x.powi(5)) + 1.0 / (42.0 * x.powi(7))
        - 1.0 / (30.0 * x.powi(9))
}

/// Product value as `mantissa * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl ScaledComplex {
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }

    pub fn ln_norm(&self) -> f64 {
        self.mantissa.norm().ln() + self.log_scale
    }
}

/// The product in scaled form, accumulated in ascending index order.
pub fn product_eval_scaled(spec: &ProductSpec, lambda: Complex64) -> Result<ScaledComplex, WeylError> {
    spec.validate()?;
    let mut m = Complex64::new(1.0, 0.0);
    let mut log_scale = 0.0;
    for (_, l) in spec.retained() {
        m *= Complex64::new(1.0, 0.0) - lambda / l;
        let r = m.norm();
        if r > 1e100 || (r < 1e-100 && r > 0.0) {
            log_scale += r.ln();
            m /= r;
        }
    }
    if spec.asymptotic_tail {
        let tail = -lambda * inverse_square_tail(spec.truncation) / (PI * PI);
        log_scale += tail.re;
        m *= Complex64::from_polar(1.0, tail.im);
    }
    Ok(ScaledComplex { mantissa: m, log_scale })
}

pub fn product_eval(spec: &ProductSpec, lambda: Complex64) -> Result<Complex64, WeylError> {
    product_eval_scaled(spec, lambda).map(|s| s.value())
}

/// Least-squares constant `C` with `g(lambda) ~ C Delta(lambda)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadamardFit {
    pub constant: Complex64,
    /// `max |g / (C Delta) - 1|` over the grid.
    pub max_rel_deviation: f64,
}

pub fn hadamard_fit(
    q: &PotentialSpec,
    robin: RobinPair,
    spec: &ProductSpec,
    lambdas: &[Complex64],
) -> Result<HadamardFit, WeylError> {
    let pairs: Vec<(Complex64, Complex64)> = lambdas
        .par_iter()
        .map(|&l| Ok((product_eval(spec, l)?, char_delta(q, robin, l)?)))
        .collect::<Result<_, WeylError>>()?;
    let num: Complex64 = pairs.iter().map(|(g, d)| d.conj() * g).sum();
    let den: f64 = pairs.iter().map(|(_, d)| d.norm_sqr()).sum();
    if den == 0.0 {
        return Err(WeylError::FitFailure("characteristic function vanishes on the whole grid".into()));
    }
    let c = num / den;
    let dev = pairs.iter().fold(0.0_f64, |m, (g, d)| m.max((g / (c * d) - 1.0).norm()));
    Ok(HadamardFit { constant: c, max_rel_deviation: dev })
}

/// Two potentials and Robin values sharing a tail on `[d, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct MatchedPair<'a> {
    pub q1: &'a PotentialSpec,
    pub q2: &'a PotentialSpec,
    pub h1: f64,
    pub h2: f64,
    pub d: f64,
}

impl MatchedPair<'_> {
    fn check(&self) -> Result<(), WeylError> {
        if !(self.d > 0.0 && self.d < 1.0) {
            return Err(WeylError::OutOfRange(format!("d = {} not in (0, 1)", self.d)));
        }
        if !self.q1.agrees_on(self.q2, self.d, 1e-12) {
            return Err(WeylError::MismatchedTails { d: self.d });
        }
        Ok(())
    }

    fn f_direct(&self, product: &ProductSpec, lambda: Complex64) -> Result<Complex64, WeylError> {
        let u = wronskian_u(self.q1, self.q2, self.h1, self.h2, lambda, self.d)?;
        let g = product_eval_scaled(product, lambda)?;
        let g2 = g.mantissa * g.mantissa;
        Ok(u / g2 * (-2.0 * g.log_scale).exp())
    }
}

fn nearest_retained(product: &ProductSpec, lambda: Complex64) -> Option<f64> {
    product.retained().map(|(_, l)| l).find(|&l| (Complex64::new(1.0, 0.0) - lambda / l).norm() < EIGEN_GUARD)
}

/// `F(lambda) = U(d; lambda) / g(lambda)^2` at each point.
pub fn f_eval(pair: MatchedPair<'_>, lambda_set: &[Complex64], product: &ProductSpec) -> Result<Vec<Complex64>, WeylError> {
    pair.check()?;
    product.validate()?;
    lambda_set
        .par_iter()
        .map(|&lambda| {
            if let Some(eigenvalue) = nearest_retained(product, lambda) {
                return Err(WeylError::NearZeroDenominator { lambda, eigenvalue });
            }
            pair.f_direct(product, lambda)
        })
        .collect()
}

/// Value at `center` of a function analytic near it, from the mean over a
/// circle of radius `radius` (trapezoid rule, exponentially accurate).
pub fn removable_value(
    f: impl Fn(Complex64) -> Result<Complex64, WeylError> + Sync,
    center: Complex64,
    radius: f64,
) -> Result<Complex64, WeylError> {
    const POINTS: usize = 32;
    let vals: Vec<Complex64> = (0..POINTS)
        .into_par_iter()
        .map(|k| f(center + Complex64::from_polar(radius, 2.0 * PI * (k as f64 + 0.5) / POINTS as f64)))
        .collect::<Result<_, _>>()?;
    Ok(vals.iter().sum::<Complex64>() / POINTS as f64)
}

/// Like [`f_eval`], but points within the guard distance of a retained
/// eigenvalue are evaluated through [`removable_value`] around that
/// eigenvalue, which is exact when the double zero of `g^2` is matched by `U`.
pub fn f_eval_removable(
    pair: MatchedPair<'_>,
    lambda_set: &[Complex64],
    product: &ProductSpec,
) -> Result<Vec<Complex64>, WeylError> {
    pair.check()?;
    product.validate()?;
    lambda_set
        .iter()
        .map(|&lambda| match nearest_retained(product, lambda) {
            Some(l) => {
                let gap = product
                    .retained()
                    .map(|(_, m)| (m - l).abs())
                    .filter(|g| *g > 0.0)
                    .fold(f64::INFINITY, f64::min);
                let radius = (0.1 * gap).min(1e-3 * l.abs().max(1.0));
                removable_value(|z| pair.f_direct(product, z), Complex64::new(l, 0.0), radius)
            }
            None => pair.f_direct(product, lambda),
        })
        .collect()
}

/// `|F(iy)|` along the imaginary axis with a log-log trend fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub samples: Vec<ScanPoint>,
    pub slope: f64,
    pub decreasing: bool,
}

pub fn f_decay_scan(pair: MatchedPair<'_>, product: &ProductSpec, ys: &[f64]) -> Result<DecayReport, WeylError> {
    if let Some(y) = ys.iter().find(|y| y.abs().sqrt() > MAX_SQRT_MODULUS) {
        return Err(WeylError::OutOfRange(format!("|lambda| = {y} exceeds the overflow-safe cap")));
    }
    let lambdas: Vec<Complex64> = ys.iter().map(|&y| Complex64::new(0.0, y)).collect();
    let vals = f_eval(pair, &lambdas, product)?;
    let mags: Vec<f64> = vals.iter().map(|v| v.norm()).collect();
    let (slope, _, _) = log_log_fit(ys, &mags)?;
    let samples = lambdas.into_iter().zip(vals).map(|(lambda, value)| ScanPoint { lambda, value }).collect();
    Ok(DecayReport { samples, slope, decreasing: slope < 0.0 })
}
