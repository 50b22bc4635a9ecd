//! Two-parameter Mittag-Leffler functions `E_{a,b}(z)` on the nonpositive
//! real axis, the relaxation primitives built from them, and L1 weights for
//! the Caputo derivative.
//!
//! Three branches cover `z = -x`:
//!
//! * `x <= min(5, 8^a)`: compensated power series.
//! * `x >= 50`: algebraic asymptotic series truncated at its smallest term.
//! * in between: the spectral (complete-monotonicity) representation,
//!   integrated by the trapezoid rule in a logarithmic variable.
//!
//! The series cap `8^a` keeps the largest series term near `e^8`, so the
//! alternating sum never loses more than about four digits.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MlError {
    #[error("Mittag-Leffler arguments out of domain: {0}")]
    DomainError(String),
    #[error("quadrature did not converge (last change {change:e})")]
    QuadratureNonConvergence { change: f64 },
}

/// Largest argument magnitude handled by the power series.
pub const Z_SWITCH: f64 = 5.0;
/// Smallest argument magnitude handled by the asymptotic series.
pub const Z_BIG: f64 = 50.0;

const SERIES_MAX_TERMS: usize = 4000;

/// A validated evaluation point for [`ml`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlQuery {
    pub alpha: f64,
    pub beta: f64,
    pub z: f64,
}

impl MlQuery {
    pub fn new(alpha: f64, beta: f64, z: f64) -> Result<Self, MlError> {
        check_domain(alpha, beta, z)?;
        Ok(Self { alpha, beta, z })
    }

    pub fn eval(&self) -> Result<f64, MlError> {
        ml(self.alpha, self.beta, self.z)
    }
}

fn check_domain(alpha: f64, beta: f64, z: f64) -> Result<(), MlError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(MlError::DomainError(format!("alpha = {alpha} not in (0, 1]")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(MlError::DomainError(format!("beta = {beta} must be positive")));
    }
    if !(z <= 0.0 && z.is_finite()) {
        return Err(MlError::DomainError(format!("z = {z} must be finite and <= 0")));
    }
    Ok(())
}

/// `1 / Gamma(y)` for any real `y`, zero at the poles.
pub fn rgamma(y: f64) -> f64 {
    if y >= 0.5 {
        if y < 170.0 {
            1.0 / libm::tgamma(y)
        } else {
            (-libm::lgamma(y)).exp()
        }
    } else {
        // Reflection: 1/Gamma(y) = Gamma(1 - y) sin(pi y) / pi.
        let n = y.round();
        let frac = y - n;
        if frac == 0.0 {
            return 0.0;
        }
        let sign = if (n as i64) % 2 == 0 { 1.0 } else { -1.0 };
        let s = sign * (PI * frac).sin();
        let g = 1.0 - y;
        if g < 170.0 {
            libm::tgamma(g) * s / PI
        } else {
            s / PI * libm::lgamma(g).exp()
        }
    }
}

/// Neumaier-compensated accumulator.
#[derive(Default)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn series(alpha: f64, beta: f64, z: f64) -> f64 {
    let mut acc = KahanSum::default();
    let mut zk = 1.0;
    // Terms peak near alpha k + beta ~ |z|^(1/alpha); only stop after that.
    let peak = z.abs().powf(1.0 / alpha) / alpha;
    for k in 0..SERIES_MAX_TERMS {
        let term = zk * rgamma(alpha * k as f64 + beta);
        acc.add(term);
        if k as f64 > peak + 2.0 && term.abs() <= 1e-17 * acc.value().abs() {
            break;
        }
        zk *= z;
        if zk == 0.0 {
            break;
        }
    }
    acc.value()
}

/// `-sum_{k>=1} (-x)^(-k) / Gamma(beta - alpha k)`, truncated at the
/// smallest nonzero term.
fn asymptotic(alpha: f64, beta: f64, x: f64) -> f64 {
    let mut acc = KahanSum::default();
    let mut xk = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..SERIES_MAX_TERMS {
        xk /= -x;
        let term = -xk * rgamma(beta - alpha * k as f64);
        if term == 0.0 {
            continue;
        }
        if term.abs() > last {
            break;
        }
        acc.add(term);
        last = term.abs();
        if term.abs() <= 1e-17 * acc.value().abs() {
            break;
        }
    }
    acc.value()
}

/// Spectral representation, valid for `0 < beta < 1 + alpha` and `alpha < 1`:
///
/// `E(-x) = 1/(pi x) int exp(-e^u) e^{(1+a-b)u} (rho sin(b pi) + sin((b-a) pi)) / (rho^2 + 2 rho cos(a pi) + 1) du`
/// with `rho = e^{a u} / x`.
fn spectral(alpha: f64, beta: f64, x: f64) -> f64 {
    let strip = (0.5 * PI).min((1.0 - alpha) * PI / alpha);
    let h = 2.0 * PI * 0.75 * strip / 32.0;
    let decay = 1.0 + alpha - beta;
    let u_lo = -40.0 / decay;
    let u_hi = 45f64.ln();
    let (sb, sba, ca) = ((beta * PI).sin(), ((beta - alpha) * PI).sin(), (alpha * PI).cos());
    let n = ((u_hi - u_lo) / h).ceil() as usize;
    let mut acc = KahanSum::default();
    for i in 0..=n {
        let u = u_hi - i as f64 * h;
        let rho = (alpha * u).exp() / x;
        let num = rho * sb + sba;
        let den = rho * rho + 2.0 * rho * ca + 1.0;
        acc.add((-(u.exp()) + decay * u).exp() * num / den);
    }
    acc.value() * h / (PI * x)
}

/// `E_{alpha,beta}(z)` for `alpha` in `(0, 1]`, `beta > 0`, `z <= 0`.
pub fn ml(alpha: f64, beta: f64, z: f64) -> Result<f64, MlError> {
    check_domain(alpha, beta, z)?;
    if alpha == 1.0 {
        return ml_alpha_one(beta, z);
    }
    let x = -z;
    if x <= Z_SWITCH.min(8f64.powf(alpha)) {
        Ok(series(alpha, beta, z))
    } else if x >= Z_BIG {
        Ok(asymptotic(alpha, beta, x))
    } else if beta <= 1.0 + 0.5 * alpha {
        Ok(spectral(alpha, beta, x))
    } else {
        // E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z.
        let lower = ml(alpha, beta - alpha, z)?;
        Ok((lower - rgamma(beta - alpha)) / z)
    }
}

fn ml_alpha_one(beta: f64, z: f64) -> Result<f64, MlError> {
    if beta == 1.0 {
        return Ok(z.exp());
    }
    if z.abs() <= Z_SWITCH {
        return Ok(series(1.0, beta, z));
    }
    if beta.fract() == 0.0 && beta > 1.0 {
        let lower = ml_alpha_one(beta - 1.0, z)?;
        return Ok((lower - rgamma(beta - 1.0)) / z);
    }
    Err(MlError::DomainError(format!("alpha = 1 with non-integer beta = {beta} is only supported for |z| <= {Z_SWITCH}")))
}

/// `|E_{a,1}(-lambda t^a) - 1/(Gamma(1-a) lambda t^a)| (lambda t^a)^2` per `t`.
pub fn ml_asymptotic_residual(alpha: f64, lambda: f64, t_values: &[f64]) -> Result<Vec<f64>, MlError> {
    if !(lambda > 0.0) {
        return Err(MlError::DomainError(format!("lambda = {lambda} must be positive")));
    }
    t_values
        .iter()
        .map(|&t| {
            if !(t >= 1.0) {
                return Err(MlError::DomainError(format!("t = {t} must be >= 1")));
            }
            let w = lambda * t.powf(alpha);
            let e = ml(alpha, 1.0, -w)?;
            Ok((e - rgamma(1.0 - alpha) / w).abs() * w * w)
        })
        .collect()
}

fn check_primitive(alpha: f64, lambda: f64, t: f64) -> Result<(), MlError> {
    check_domain(alpha, 1.0, 0.0)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(MlError::DomainError(format!("lambda = {lambda} must be finite and >= 0")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(MlError::DomainError(format!("t = {t} must be finite and >= 0")));
    }
    Ok(())
}

/// `int_0^t s^(a-1) E_{a,a}(-lambda s^a) ds = t^a E_{a,a+1}(-lambda t^a)`.
pub fn relax_primitive(alpha: f64, lambda: f64, t: f64) -> Result<f64, MlError> {
    check_primitive(alpha, lambda, t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let ta = t.powf(alpha);
    let w = lambda * ta;
    if w < 1.0 {
        Ok(ta * series(alpha, alpha + 1.0, -w))
    } else {
        Ok((1.0 - ml(alpha, 1.0, -w)?) / lambda)
    }
}

/// Antiderivative of [`relax_primitive`] in `t`:
/// `t^(1+a) E_{a,a+2}(-lambda t^a)`.
///
/// Differences of this function integrate the relaxation kernel exactly
/// against piecewise-linear data.
pub fn relax_second_primitive(alpha: f64, lambda: f64, t: f64) -> Result<f64, MlError> {
    check_primitive(alpha, lambda, t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let ta = t.powf(alpha);
    let w = lambda * ta;
    if w < 1.0 {
        Ok(t * ta * series(alpha, alpha + 2.0, -w))
    } else {
        Ok(t * (1.0 - ml(alpha, 2.0, -w)?) / lambda)
    }
}

/// `|int_0^inf e^(-zeta t) E_{a,1}(-lambda t^a) dt - zeta^(a-1) / (zeta^a + lambda)|`.
///
/// The integral runs over `t = e^u` with step halving until successive
/// estimates agree; both truncated tails are bounded by `E <= 1`.
pub fn ml_laplace_residual(alpha: f64, lambda: f64, zeta: f64) -> Result<f64, MlError> {
    check_domain(alpha, 1.0, 0.0)?;
    if !(lambda > 0.0 && zeta > 0.0) {
        return Err(MlError::DomainError(format!("lambda = {lambda} and zeta = {zeta} must be positive")));
    }
    let tail: f64 = 1e-15;
    let u_lo = tail.ln();
    // e^{-zeta T} / zeta <= tail.
    let t_hi = ((1.0 / (zeta * tail)).ln() / zeta).max(1.0);
    let u_hi = t_hi.ln();
    let f = |u: f64| -> Result<f64, MlError> {
        let t = u.exp();
        Ok((-zeta * t).exp() * ml(alpha, 1.0, -lambda * t.powf(alpha))? * t)
    };

    let mut h = 0.25;
    let n0 = ((u_hi - u_lo) / h).ceil() as usize;
    h = (u_hi - u_lo) / n0 as f64;
    let mut sum = 0.5 * (f(u_lo)? + f(u_hi)?);
    for i in 1..n0 {
        sum += f(u_lo + i as f64 * h)?;
    }
    let mut estimate = sum * h;
    let mut change = f64::INFINITY;
    for _ in 0..10 {
        let mids = ((u_hi - u_lo) / h).round() as usize;
        for i in 0..mids {
            sum += f(u_lo + (i as f64 + 0.5) * h)?;
        }
        h *= 0.5;
        let next = sum * h;
        change = (next - estimate).abs();
        estimate = next;
        if change <= 1e-13 * estimate.abs() {
            let exact = zeta.powf(alpha - 1.0) / (zeta.powf(alpha) + lambda);
            return Ok((estimate - exact).abs());
        }
    }
    Err(MlError::QuadratureNonConvergence { change })
}

/// L1 coefficients for the Caputo derivative on a uniform step `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Weights {
    pub alpha: f64,
    pub tau: f64,
    pub count: usize,
    pub weights: Vec<f64>,
}

/// `b_j = ((j+1)^(1-a) - j^(1-a)) tau^(-a) / Gamma(2-a)`, `j = 0..count`.
pub fn l1_weights(alpha: f64, tau: f64, count: usize) -> L1Weights {
    let scale = tau.powf(-alpha) * rgamma(2.0 - alpha);
    let p = 1.0 - alpha;
    let weights = (0..count)
        .map(|j| {
            let j = j as f64;
            let lower = if j == 0.0 { 0.0 } else { j.powf(p) };
            ((j + 1.0).powf(p) - lower) * scale
        })
        .collect();
    L1Weights { alpha, tau, count, weights }
}
