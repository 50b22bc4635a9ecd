use serde::{Deserialize, Serialize};

use super::ForwardError;

/// Boundary drive `eta` sampled on an increasing time grid starting at 0,
/// interpolated piecewise-linearly between samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveSignal {
    t_grid: Vec<f64>,
    values: Vec<f64>,
    pub description: String,
}

impl DriveSignal {
    pub fn new(t_grid: Vec<f64>, values: Vec<f64>, description: impl Into<String>) -> Result<Self, ForwardError> {
        if t_grid.len() != values.len() {
            return Err(ForwardError::InvalidDrive(format!(
                "{} times but {} values",
                t_grid.len(),
                values.len()
            )));
        }
        if t_grid.len() < 2 {
            return Err(ForwardError::InvalidDrive("need at least two samples".into()));
        }
        if t_grid[0] != 0.0 {
            return Err(ForwardError::InvalidDrive(format!("time grid starts at {} instead of 0", t_grid[0])));
        }
        if let Some(i) = t_grid.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(ForwardError::InvalidDrive(format!("time grid not increasing at index {}", i + 1)));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ForwardError::InvalidDrive(format!("non-finite value at index {i}")));
        }
        if values[0] != 0.0 {
            return Err(ForwardError::InvalidDrive(format!("eta(0) = {} must be 0", values[0])));
        }
        Ok(Self { t_grid, values, description: description.into() })
    }

    /// Samples `f` on `steps + 1` uniform points of `[0, t_end]`.
    pub fn uniform(t_end: f64, steps: usize, f: impl Fn(f64) -> f64, description: impl Into<String>) -> Result<Self, ForwardError> {
        if !(t_end > 0.0) || steps == 0 {
            return Err(ForwardError::InvalidDrive(format!("bad uniform grid: t_end = {t_end}, steps = {steps}")));
        }
        let t: Vec<f64> = (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect();
        let v = t.iter().map(|&s| f(s)).collect();
        Self::new(t, v, description)
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t_end(&self) -> f64 {
        *self.t_grid.last().expect("nonempty grid")
    }

    /// Piecewise-linear interpolant; zero for `t <= 0`, clamped past the end.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let i = self.t_grid.partition_point(|&s| s <= t);
        if i >= self.t_grid.len() {
            return *self.values.last().unwrap();
        }
        let (t0, t1) = (self.t_grid[i - 1], self.t_grid[i]);
        let w = (t - t0) / (t1 - t0);
        self.values[i - 1] * (1.0 - w) + self.values[i] * w
    }

    /// Slope of each linear piece.
    pub fn slopes(&self) -> Vec<f64> {
        self.t_grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| (v[1] - v[0]) / (t[1] - t[0]))
            .collect()
    }

    /// Largest slope magnitude (Lipschitz constant of the interpolant).
    pub fn lipschitz(&self) -> f64 {
        self.slopes().iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            t_grid: self.t_grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            description: format!("{} x {c}", self.description),
        }
    }

    /// Restriction to `[0, t_star]`, with a sample inserted at `t_star`.
    pub fn truncated(&self, t_star: f64) -> Result<Self, ForwardError> {
        if !(t_star > 0.0 && t_star <= self.t_end()) {
            return Err(ForwardError::InvalidDrive(format!("cut point {t_star} outside (0, {}]", self.t_end())));
        }
        let mut t: Vec<f64> = self.t_grid.iter().copied().take_while(|&s| s < t_star).collect();
        let mut v: Vec<f64> = self.values[..t.len()].to_vec();
        t.push(t_star);
        v.push(self.eval(t_star));
        Self::new(t, v, format!("{} on [0, {t_star}]", self.description))
    }

    /// Uniform step if the grid is uniform to within `1e-9` relative.
    pub fn uniform_step(&self) -> Option<f64> {
        let n = self.t_grid.len() - 1;
        let tau = self.t_end() / n as f64;
        let ok = self.t_grid.iter().enumerate().all(|(i, &t)| (t - i as f64 * tau).abs() <= 1e-9 * tau);
        ok.then_some(tau)
    }

    /// CSV with header `t,eta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,eta\n");
        for (t, v) in self.t_grid.iter().zip(&self.values) {
            out.push_str(&format!("{t:e},{v:e}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonzero_start() {
        assert!(DriveSignal::new(vec![0.0, 1.0], vec![1.0, 2.0], "").is_err());
        assert!(DriveSignal::new(vec![0.0, 1.0, 1.0], vec![0.0, 2.0, 3.0], "").is_err());
        assert!(DriveSignal::new(vec![0.0, 1.0], vec![0.0], "").is_err());
    }

    #[test]
    fn interpolates_and_truncates() {
        let d = DriveSignal::uniform(1.0, 4, |t| t * t, "t^2").unwrap();
        assert!((d.eval(0.375) - 0.5 * (0.0625 + 0.25)).abs() < 1e-15);
        assert_eq!(d.uniform_step(), Some(0.25));
        let c = d.truncated(0.6).unwrap();
        assert_eq!(c.t_grid(), &[0.0, 0.25, 0.5, 0.6]);
        assert!((c.eval(0.55) - d.eval(0.55)).abs() < 1e-15);
        assert!(c.uniform_step().is_none());
    }

    #[test]
    fn csv_header() {
        let d = DriveSignal::uniform(1.0, 2, |t| t, "ramp").unwrap();
        assert!(d.to_csv().starts_with("t,eta\n0e0,0e0\n"));
    }
}
