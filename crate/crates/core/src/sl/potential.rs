use serde::{Deserialize, Serialize};

use super::SlError;

/// Default number of grid intervals for potentials and shooting grids.
pub const DEFAULT_GRID: usize = 2048;

/// Interpolation rule between potential samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    #[default]
    PiecewiseLinear,
}

/// A continuous potential `q` on `[0, 1]`, sampled on a uniform grid and
/// interpolated piecewise linearly.
///
/// Serializes as `{"grid_size": N, "samples": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialRepr", into = "PotentialRepr")]
pub struct PotentialSpec {
    samples: Vec<f64>,
    interpolation: Interpolation,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialRepr {
    grid_size: usize,
    samples: Vec<f64>,
}

impl TryFrom<PotentialRepr> for PotentialSpec {
    type Error = SlError;

    fn try_from(r: PotentialRepr) -> Result<Self, SlError> {
        if r.samples.len() != r.grid_size + 1 {
            return Err(SlError::InvalidPotential(format!(
                "grid_size {} needs {} samples, got {}",
                r.grid_size,
                r.grid_size + 1,
                r.samples.len()
            )));
        }
        PotentialSpec::from_samples(r.samples)
    }
}

impl From<PotentialSpec> for PotentialRepr {
    fn from(p: PotentialSpec) -> Self {
        PotentialRepr { grid_size: p.grid_size(), samples: p.samples }
    }
}

impl PotentialSpec {
    /// Builds a potential from `grid_size + 1` samples at `x_i = i / grid_size`.
    pub fn from_samples(samples: Vec<f64>) -> Result<Self, SlError> {
        if samples.len() < 2 {
            return Err(SlError::InvalidPotential("need at least two samples".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(SlError::InvalidPotential(format!("sample {i} is not finite")));
        }
        Ok(Self { samples, interpolation: Interpolation::PiecewiseLinear })
    }

    /// Samples `f` on a uniform grid with `grid_size` intervals.
    pub fn from_fn(grid_size: usize, f: impl Fn(f64) -> f64) -> Result<Self, SlError> {
        if grid_size == 0 {
            return Err(SlError::InvalidPotential("grid_size must be positive".into()));
        }
        let n = grid_size as f64;
        Self::from_samples((0..=grid_size).map(|i| f(i as f64 / n)).collect())
    }

    pub fn constant(grid_size: usize, value: f64) -> Result<Self, SlError> {
        Self::from_fn(grid_size, |_| value)
    }

    pub fn zero(grid_size: usize) -> Self {
        Self::constant(grid_size, 0.0).expect("zero potential is valid")
    }

    pub fn grid_size(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// `true` iff every sample is `<= 0`.
    pub fn is_admissible(&self) -> bool {
        self.samples.iter().all(|&v| v <= 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Piecewise-linear value at `x`, clamped to `[0, 1]`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.grid_size();
        let s = (x.clamp(0.0, 1.0)) * n as f64;
        let i = (s.floor() as usize).min(n - 1);
        let t = s - i as f64;
        self.samples[i] + (self.samples[i + 1] - self.samples[i]) * t
    }

    /// Largest `|q'|` over the cells.
    pub fn max_slope(&self) -> f64 {
        let n = self.grid_size() as f64;
        self.samples.windows(2).fold(0.0_f64, |m, w| m.max((w[1] - w[0]).abs() * n))
    }

    /// The same potential shifted by a constant.
    pub fn shifted(&self, c: f64) -> Self {
        Self { samples: self.samples.iter().map(|v| v + c).collect(), interpolation: self.interpolation }
    }

    /// `true` when the two potentials agree (to `tol`) at every sample with `x >= d`.
    /// Both must share a grid.
    pub fn agrees_on(&self, other: &Self, d: f64, tol: f64) -> bool {
        if self.grid_size() != other.grid_size() {
            return false;
        }
        let n = self.grid_size() as f64;
        self.samples
            .iter()
            .zip(&other.samples)
            .enumerate()
            .filter(|(i, _)| *i as f64 / n >= d - 1e-12)
            .all(|(_, (a, b))| (a - b).abs() <= tol)
    }
}

/// Robin coefficients: `u'(0) - h u(0) = 0`, `u'(1) + H u(1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobinPair {
    pub h: f64,
    #[serde(rename = "H")]
    pub big_h: f64,
}

impl RobinPair {
    pub fn new(h: f64, big_h: f64) -> Result<Self, SlError> {
        if !(h >= 0.0 && big_h >= 0.0 && h.is_finite() && big_h.is_finite()) {
            return Err(SlError::InvalidRobin { h, big_h });
        }
        Ok(Self { h, big_h })
    }

    pub fn neumann() -> Self {
        Self { h: 0.0, big_h: 0.0 }
    }
}
