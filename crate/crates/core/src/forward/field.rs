use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldMethod {
    Spectral,
    L1fd,
}

impl FieldMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldMethod::Spectral => "spectral",
            FieldMethod::L1fd => "l1fd",
        }
    }
}

/// Discretization metadata of a [`SpaceTimeField`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Resolution {
    Modes {
        n_modes: usize,
        /// Whether the quasi-static remainder of the truncated series was added.
        tail_corrected: bool,
        /// Estimate of the remaining truncation error in max norm.
        tail_bound: f64,
    },
    Grid { nx: usize, nt: usize },
}

/// `u(x, t)` samples; `values[i][k]` is `u(x_grid[i], t_grid[k])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeField {
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub method: FieldMethod,
    pub resolution: Resolution,
}

impl SpaceTimeField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Time series at the grid point nearest to `x`.
    pub fn series_at(&self, x: f64) -> &[f64] {
        let i = self
            .x_grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
            .map(|p| p.0)
            .expect("nonempty x grid");
        &self.values[i]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }

    /// CSV with header `x,t,u,method`, x-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,t,u,method\n");
        for (x, row) in self.x_grid.iter().zip(&self.values) {
            for (t, u) in self.t_grid.iter().zip(row) {
                out.push_str(&format!("{x:e},{t:e},{u:e},{}\n", self.method.as_str()));
            }
        }
        out
    }
}
