use std::f64::consts::PI;

use serde::Serialize;

use super::{EigenSystem, SlError};

/// Boundedness check for `r_n = (sqrt(lambda_n) - n pi) n`.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    /// `r_n` for `n = 1..=n_max`.
    pub r: Vec<f64>,
    /// `max |r_n|` over the upper half of the computed modes.
    pub upper_max: f64,
    /// Least-squares slope of `|r_n|` against `n` over the upper half.
    pub slope: f64,
    /// Slope times the window width, i.e. the fitted drift across the window.
    pub drift: f64,
    pub pass: bool,
}

/// Drift over the fit window may not exceed this fraction of the window maximum.
const DRIFT_FRACTION: f64 = 0.25;

pub fn verify_asymptotics(es: &EigenSystem) -> Result<AsymptoticsReport, SlError> {
    if es.len() < 20 {
        return Err(SlError::InsufficientModes { needed: 20, have: es.len() });
    }
    let r: Vec<f64> = (1..es.len()).map(|n| (es.lambdas[n].max(0.0).sqrt() - n as f64 * PI) * n as f64).collect();
    Ok(drift_report(r))
}

pub fn verify_split_asymptotics(mu: &[f64], len: f64) -> Result<AsymptoticsReport, SlError> {
    if mu.len() < 20 {
        return Err(SlError::InsufficientModes { needed: 20, have: mu.len() });
    }
    if !(len > 0.0 && len < 1.0) {
        return Err(SlError::PointOutOfRange(len));
    }
    let r: Vec<f64> =
        (1..mu.len()).map(|n| (mu[n].max(0.0).sqrt() - (n as f64 + 0.5) * PI / len) * n as f64).collect();
    Ok(drift_report(r))
}

fn drift_report(r: Vec<f64>) -> AsymptoticsReport {
    let count = r.len() + 1;
    let start = count / 2;
    let window: Vec<(f64, f64)> = (start..count).map(|n| (n as f64, r[n - 1].abs())).collect();
    let upper_max = window.iter().fold(0.0_f64, |m, p| m.max(p.1));
    let slope = least_squares_slope(&window);
    let width = window.last().unwrap().0 - window[0].0;
    let drift = slope * width;
    AsymptoticsReport { r, upper_max, slope, drift, pass: drift <= DRIFT_FRACTION * upper_max + 1e-6 }
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl::{eigen_system, PotentialSpec, RobinPair};

    #[test]
    fn free_spectrum_has_zero_remainder() {
        let es = eigen_system(&PotentialSpec::zero(1024), RobinPair::neumann(), 24).unwrap();
        let rep = verify_asymptotics(&es).unwrap();
        assert!(rep.r.iter().all(|v| v.abs() < 1e-7), "{:?}", rep.r);
        assert!(rep.pass);
    }

    #[test]
    fn needs_twenty_modes() {
        let es = eigen_system(&PotentialSpec::zero(256), RobinPair::neumann(), 5).unwrap();
        assert!(matches!(verify_asymptotics(&es), Err(SlError::InsufficientModes { .. })));
    }

    #[test]
    fn growing_sequence_fails() {
        // Fake a spectrum whose remainder grows like sqrt(n).
        let mut es = eigen_system(&PotentialSpec::zero(64), RobinPair::neumann(), 0).unwrap();
        es.lambdas = (0..40).map(|n| {
            let n = n as f64;
            (n * PI + if n > 0.0 { n.sqrt() / n } else { 0.0 }).powi(2)
        }).collect();
        es.efuncs = vec![es.efuncs[0].clone(); 40];
        let rep = verify_asymptotics(&es).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn robin_closed_form_oracle_is_bounded() {
        // q = 0, h = H = 1: roots of (s^2 - 1) sin s = 2 s cos s, located per interval by bisection.
        let f = |s: f64| (s * s - 1.0) * s.sin() - 2.0 * s * s.cos();
        let mut r = Vec::new();
        for n in 1..=40usize {
            let (mut a, mut b) = (n as f64 * PI - 0.5 * PI + 1e-9, n as f64 * PI + 0.5 * PI - 1e-9);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if f(a) * f(m) <= 0.0 { b = m } else { a = m }
            }
            r.push(((0.5 * (a + b)) - n as f64 * PI) * n as f64);
        }
        let es = eigen_system(&PotentialSpec::zero(1024), RobinPair::new(1.0, 1.0).unwrap(), 40).unwrap();
        let rep = verify_asymptotics(&es).unwrap();
        assert!(rep.pass);
        for (n, want) in r.iter().enumerate() {
            assert!((rep.r[n] - want).abs() < 1e-6, "n = {}: {} vs {}", n + 1, rep.r[n], want);
        }
    }

    #[test]
    fn split_free_spectra_have_zero_remainder() {
        let q = PotentialSpec::zero(1024);
        let (minus, plus) = crate::sl::split_spectra(&q, 0.4, RobinPair::neumann(), 24).unwrap();
        for (mu, len) in [(minus, 0.4), (plus, 0.6)] {
            let rep = verify_split_asymptotics(&mu, len).unwrap();
            assert!(rep.pass && rep.upper_max < 1e-6, "{rep:?}");
        }
    }
}
