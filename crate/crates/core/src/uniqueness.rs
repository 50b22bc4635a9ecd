//! Eigenvalue counting, the split of the spectrum at an observation point,
//! and the `(d, x0)` classifier for the two uniqueness theorems.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sl::{split_spectra, EigenSystem, SlError};

/// Default relative threshold for deciding `e_n(x0) != 0`.
pub const DEFAULT_TAU: f64 = 1e-6;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum UniquenessError {
    #[error("domain error: {0}")]
    DomainError(String),
    #[error(transparent)]
    Sl(#[from] SlError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetLabel {
    FullSpectrum,
    LambdaSet,
    LambdaComplement,
    MuMinus,
    MuPlus,
}

/// A strictly increasing, finite, nonnegative sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountedSet {
    values: Vec<f64>,
    pub label: SetLabel,
}

impl CountedSet {
    /// Values in `(-1e-8, 0)` are rounded to zero so that a numerically
    /// computed ground state of a Neumann problem is accepted.
    pub fn new(values: Vec<f64>, label: SetLabel) -> Result<Self, UniquenessError> {
        let values: Vec<f64> = values.into_iter().map(|v| if v < 0.0 && v > -1e-8 { 0.0 } else { v }).collect();
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(UniquenessError::DomainError(format!("value {v} is negative or not finite")));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(UniquenessError::DomainError("values are not strictly increasing".into()));
        }
        Ok(Self { values, label })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `#{a in set : a <= s}`.
pub fn counting(set: &CountedSet, s: f64) -> usize {
    set.values.partition_point(|&v| v <= s)
}

/// Per-mode record behind a [`lambda_set`] decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeAudit {
    pub index: usize,
    pub lambda: f64,
    pub e_x0: f64,
    pub e_max: f64,
    pub in_lambda: bool,
    /// `|e(x0)| / max|e|` lies within two decades of `tau`.
    pub near_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSplit {
    pub lambda: CountedSet,
    pub complement: CountedSet,
    pub audit: Vec<ModeAudit>,
}

impl LambdaSplit {
    pub fn near_threshold_modes(&self) -> Vec<usize> {
        self.audit.iter().filter(|a| a.near_threshold).map(|a| a.index).collect()
    }
}

/// Splits the computed spectrum into modes with `|e_n(x0)| > tau max|e_n|`
/// and the rest.
pub fn lambda_set(es: &EigenSystem, x0: f64, tau: f64) -> Result<LambdaSplit, UniquenessError> {
    if !(0.0..=1.0).contains(&x0) {
        return Err(UniquenessError::DomainError(format!("x0 = {x0} not in [0, 1]")));
    }
    if !(tau > 0.0) {
        return Err(UniquenessError::DomainError(format!("tau = {tau} must be positive")));
    }
    let audit: Vec<ModeAudit> = (0..es.len())
        .map(|n| {
            let e_x0 = es.e(n, x0);
            let e_max = es.efuncs[n].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let ratio = e_x0.abs() / e_max;
            ModeAudit {
                index: n,
                lambda: es.lambdas[n],
                e_x0,
                e_max,
                in_lambda: ratio > tau,
                near_threshold: ratio > 1e-2 * tau && ratio < 1e2 * tau,
            }
        })
        .collect();
    let pick = |inside: bool| audit.iter().filter(|a| a.in_lambda == inside).map(|a| a.lambda).collect::<Vec<_>>();
    Ok(LambdaSplit {
        lambda: CountedSet::new(pick(true), SetLabel::LambdaSet)?,
        complement: CountedSet::new(pick(false), SetLabel::LambdaComplement)?,
        audit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InclusionMiss {
    pub lambda: f64,
    pub dist_minus: f64,
    pub dist_plus: f64,
}

/// Whether every member of the complement set is an eigenvalue of both split problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub checked: usize,
    pub tolerance: f64,
    pub violations: Vec<InclusionMiss>,
    pub pass: bool,
}

fn nearest(values: &[f64], x: f64) -> f64 {
    values.iter().map(|v| (v - x).abs()).fold(f64::INFINITY, f64::min)
}

/// Checks the complement against the Dirichlet-at-`x0` split spectra of the
/// potential and Robin data stored in `es`. Matching is relative:
/// `|lambda - mu| <= tol * max(1, lambda)`.
pub fn complement_inclusion_check(
    es: &EigenSystem,
    x0: f64,
    tau: f64,
    tol: f64,
) -> Result<InclusionReport, UniquenessError> {
    let split = lambda_set(es, x0, tau)?;
    let members = split.complement.values();
    if members.is_empty() {
        return Ok(InclusionReport { checked: 0, tolerance: tol, violations: Vec::new(), pass: true });
    }
    let (minus, plus) = split_spectra(&es.potential, x0, es.robin, es.len())?;
    let violations: Vec<InclusionMiss> = members
        .iter()
        .map(|&lambda| InclusionMiss { lambda, dist_minus: nearest(&minus, lambda), dist_plus: nearest(&plus, lambda) })
        .filter(|m| m.dist_minus.max(m.dist_plus) > tol * m.lambda.max(1.0))
        .collect();
    Ok(InclusionReport { checked: members.len(), tolerance: tol, pass: violations.is_empty(), violations })
}

fn check_s_grid(s_grid: &[f64]) -> Result<(), UniquenessError> {
    if s_grid.len() < 2 {
        return Err(UniquenessError::DomainError("s grid needs at least two points".into()));
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0]) || !(s_grid[0] > 0.0) {
        return Err(UniquenessError::DomainError("s grid must be positive and increasing".into()));
    }
    Ok(())
}

/// Upper half of the grid, where "for large s" statements are tested.
fn upper_half(s_grid: &[f64]) -> &[f64] {
    &s_grid[s_grid.len() / 2..]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub s: f64,
    pub count: usize,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub x0: f64,
    pub rows: Vec<BoundRow>,
    /// Index of the first row in the tested window.
    pub window_start: usize,
    pub pass: bool,
}

impl BoundReport {
    /// CSV with header `s,count,bound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,count,bound\n");
        for r in &self.rows {
            out.push_str(&format!("{:e},{},{:e}\n", r.s, r.count, r.bound));
        }
        out
    }
}

/// Tests `N(s) >= (1 - min(1 - x0, x0)) sqrt(s) / pi` on the upper half of `s_grid`.
pub fn counting_bound_check(set: &CountedSet, x0: f64, s_grid: &[f64]) -> Result<BoundReport, UniquenessError> {
    if !(0.0..=1.0).contains(&x0) {
        return Err(UniquenessError::DomainError(format!("x0 = {x0} not in [0, 1]")));
    }
    check_s_grid(s_grid)?;
    let factor = 1.0 - x0.min(1.0 - x0);
    let rows: Vec<BoundRow> =
        s_grid.iter().map(|&s| BoundRow { s, count: counting(set, s), bound: factor * s.sqrt() / PI }).collect();
    let window_start = s_grid.len() / 2;
    let pass = rows[window_start..].iter().all(|r| r.count as f64 >= r.bound);
    Ok(BoundReport { x0, rows, window_start, pass })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    /// Minimum of `N(s) / sqrt(s)` over the upper half of the grid.
    pub estimate: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Largest `d` the criterion admits, `A / 2`.
    pub implied_d_max: f64,
}

/// Compares the density `liminf N(s) s^(-1/2)` with `A / pi`.
pub fn density_criterion(set: &CountedSet, a: f64, s_grid: &[f64]) -> Result<DensityReport, UniquenessError> {
    if !(a > 0.0) {
        return Err(UniquenessError::DomainError(format!("A = {a} must be positive")));
    }
    check_s_grid(s_grid)?;
    let estimate =
        upper_half(s_grid).iter().map(|&s| counting(set, s) as f64 / s.sqrt()).fold(f64::INFINITY, f64::min);
    let threshold = a / PI;
    Ok(DensityReport { estimate, threshold, pass: estimate > threshold, implied_d_max: a / 2.0 })
}

/// Constants `(A, B)` asserted for `N_Lambda(s) >= A N_sigma(s) + B` at large `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Theorem1CaseI,
    Theorem1CaseIi,
    Theorem2Conditional,
    Unknown,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Theorem1CaseI => "theorem1-case-i",
            Verdict::Theorem1CaseIi => "theorem1-case-ii",
            Verdict::Theorem2Conditional => "theorem2-conditional",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionVerdict {
    pub d: f64,
    pub x0: f64,
    pub verdict: Verdict,
    pub condition_note: String,
}

/// Classifies `(d, x0)`.
///
/// * case i: `d <= x0 <= 1`;
/// * case ii: `x0 < min(d, 1 - 2d)` with `d < 1/2`;
/// * conditional: `1 - 2d < x0 < d`, `1/3 < d < 1/2`, and a certificate with
///   `A >= 2d` and `B >= 1/2 - d`.
///
/// The three sets are disjoint, so the verdict is unique.
pub fn classify_region(d: f64, x0: f64, certificate: Option<Certificate>) -> Result<RegionVerdict, UniquenessError> {
    if !(d > 0.0 && d < 1.0) {
        return Err(UniquenessError::DomainError(format!("d = {d} not in (0, 1)")));
    }
    if !(0.0..=1.0).contains(&x0) {
        return Err(UniquenessError::DomainError(format!("x0 = {x0} not in [0, 1]")));
    }
    let (verdict, condition_note) = if d <= x0 {
        (Verdict::Theorem1CaseI, String::new())
    } else if d < 0.5 && x0 < d.min(1.0 - 2.0 * d) {
        (Verdict::Theorem1CaseIi, String::new())
    } else if 1.0 - 2.0 * d < x0 && x0 < d && d > 1.0 / 3.0 && d < 0.5 {
        let need_a = 2.0 * d;
        let need_b = 0.5 - d;
        let weak_b = -0.25 - d;
        match certificate {
            Some(c) if c.a >= need_a && c.b >= need_b => (
                Verdict::Theorem2Conditional,
                format!("certificate A = {} >= {need_a}, B = {} >= {need_b} (weaker variant B >= {weak_b})", c.a, c.b),
            ),
            Some(c) => (
                Verdict::Unknown,
                format!(
                    "certificate A = {}, B = {} fails A >= {need_a}, B >= {need_b} (weaker variant B >= {weak_b})",
                    c.a, c.b
                ),
            ),
            None => (Verdict::Unknown, format!("needs a certificate with A >= {need_a}, B >= {need_b}")),
        }
    } else {
        (Verdict::Unknown, String::new())
    };
    Ok(RegionVerdict { d, x0, verdict, condition_note })
}

/// Verdicts at the cell centres of a `resolution x resolution` lattice on the unit square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub resolution: usize,
    /// Row-major in `d`, then `x0`.
    pub cells: Vec<RegionVerdict>,
}

impl RegionMap {
    /// CSV with header `d,x0,verdict`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,x0,verdict\n");
        for c in &self.cells {
            out.push_str(&format!("{},{},{}\n", c.d, c.x0, c.verdict.as_str()));
        }
        out
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.cells.iter().filter(|c| c.verdict == verdict).count()
    }
}

pub fn region_map(resolution: usize, certificate: Option<Certificate>) -> Result<RegionMap, UniquenessError> {
    if resolution < 10 {
        return Err(UniquenessError::DomainError(format!("resolution {resolution} < 10")));
    }
    let centre = |i: usize| (i as f64 + 0.5) / resolution as f64;
    let cells = (0..resolution * resolution)
        .into_par_iter()
        .map(|k| classify_region(centre(k / resolution), centre(k % resolution), certificate))
        .collect::<Result<_, _>>()?;
    Ok(RegionMap { resolution, cells })
}
