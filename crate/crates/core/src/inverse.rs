//! Twin-experiment reconstruction of `q` on `[0, d]` and `h` from the
//! boundary-driven response `u(x0, t_k)`.
//!
//! Data are synthesized with the L1 finite-difference solver and inverted
//! with the eigenfunction-series solver, so the two sides never share a
//! discretization. Candidates parameterize `q` on `[0, d]` as
//! `q_tail(d) + sum_j c_j cos((2j + 1) pi x / (2d))`; every basis function
//! vanishes at `x = d`, which keeps the candidate continuous with the known
//! tail.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forward::{solve_l1_fd, solve_spectral, DriveSignal, ForwardError, SpaceTimeField};
use crate::sl::{eigen_system_with, EigenOptions, EigenSystem, PotentialSpec, RobinPair, SlError};

/// Largest supported basis dimension.
pub const MAX_BASIS: usize = 16;
/// Normal-matrix condition number above which the step is damped.
pub const MAX_CONDITION: f64 = 1e12;
/// Rounds of stronger damping tried after a failed line search.
const DAMPING_RETRIES: usize = 4;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum InverseError {
    #[error("misfit increased on {trials} consecutive line-search trials at iteration {iteration}")]
    DivergenceDetected { iteration: usize, trials: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("potentials differ on [{d}, 1] in pair {index}")]
    MismatchedTails { index: usize, d: f64 },
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Sl(#[from] SlError),
}

/// Discretization used by the inversion's forward model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSettings {
    /// Potential grid intervals.
    pub grid: usize,
    /// Retained modes `0..n_max`.
    pub n_max: usize,
}

impl Default for SpectralSettings {
    fn default() -> Self {
        Self { grid: 512, n_max: 40 }
    }
}

/// Discretization used to synthesize data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSettings {
    pub nx: usize,
    pub nt: usize,
}

impl Default for FdSettings {
    fn default() -> Self {
        Self { nx: 320, nt: 512 }
    }
}

/// A potential on `[0, 1]` together with its left Robin coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub q: PotentialSpec,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseProblemSpec {
    pub alpha: f64,
    pub x0: f64,
    pub d: f64,
    /// Known potential; only its values on `[d, 1]` are used.
    pub q_tail: PotentialSpec,
    pub big_h: f64,
    pub eta: DriveSignal,
    pub t_samples: Vec<f64>,
    pub data: Vec<f64>,
    pub noise_level: f64,
    #[serde(default)]
    pub forward: SpectralSettings,
}

impl InverseProblemSpec {
    pub fn validate(&self) -> Result<(), InverseError> {
        let bad = |m: String| Err(InverseError::InvalidInput(m));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha = {} not in (0, 1]", self.alpha));
        }
        if !(self.d > 0.0 && self.d < 1.0) {
            return bad(format!("d = {} not in (0, 1)", self.d));
        }
        if !(0.0..=1.0).contains(&self.x0) {
            return bad(format!("x0 = {} not in [0, 1]", self.x0));
        }
        if !(self.big_h >= 0.0) {
            return bad(format!("H = {} must be >= 0", self.big_h));
        }
        if !(self.noise_level >= 0.0) {
            return bad(format!("noise level {} must be >= 0", self.noise_level));
        }
        if self.t_samples.is_empty() || self.t_samples.len() != self.data.len() {
            return bad(format!("{} sample times but {} data values", self.t_samples.len(), self.data.len()));
        }
        let t_end = self.eta.t_end();
        if let Some(t) = self.t_samples.iter().find(|t| !(**t >= 0.0 && **t <= t_end)) {
            return bad(format!("sample time {t} outside the drive support [0, {t_end}]"));
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return bad("data contain non-finite values".into());
        }
        Ok(())
    }

    /// CSV with header `t,u`.
    pub fn data_to_csv(&self) -> String {
        series_csv(&self.t_samples, &self.data)
    }

}

pub(crate) fn series_csv(t: &[f64], u: &[f64]) -> String {
    let mut out = String::from("t,u\n");
    for (t, u) in t.iter().zip(u) {
        out.push_str(&format!("{t:e},{u:e}\n"));
    }
    out
}

/// Cosine coefficients of `q - q_tail(d)` on `[0, d]` and the Robin value `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateParam {
    pub coeffs: Vec<f64>,
    pub h: f64,
}

impl CandidateParam {
    /// All coefficients zero and `h = 0.1`.
    pub fn neutral(basis_dim: usize) -> Self {
        Self { coeffs: vec![0.0; basis_dim], h: 0.1 }
    }

    fn validate(&self) -> Result<(), InverseError> {
        if self.coeffs.len() > MAX_BASIS {
            return Err(InverseError::InvalidInput(format!("basis dimension {} > {MAX_BASIS}", self.coeffs.len())));
        }
        if !(self.h >= 0.0 && self.h.is_finite()) || self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(InverseError::InvalidInput("candidate must be finite with h >= 0".into()));
        }
        Ok(())
    }

    /// Candidate value of `q` at `x`, using `q_tail` on `[d, 1]`.
    pub fn q_at(&self, x: f64, d: f64, q_tail: &PotentialSpec) -> f64 {
        if x >= d {
            return q_tail.eval(x);
        }
        let base = q_tail.eval(d);
        self.coeffs
            .iter()
            .enumerate()
            .fold(base, |acc, (j, c)| acc + c * ((2 * j + 1) as f64 * PI * x / (2.0 * d)).cos())
    }

    pub fn potential(&self, d: f64, q_tail: &PotentialSpec, grid: usize) -> Result<PotentialSpec, InverseError> {
        Ok(PotentialSpec::from_fn(grid, |x| self.q_at(x, d, q_tail))?)
    }

    /// Least-squares projection of `q` on `[0, d]` onto the first `basis_dim`
    /// basis functions (which are orthogonal there).
    pub fn project(q: &PotentialSpec, h: f64, d: f64, basis_dim: usize) -> Self {
        let base = q.eval(d);
        let n = 4000;
        let coeffs = (0..basis_dim)
            .map(|j| {
                let f: Vec<f64> = (0..=n)
                    .map(|i| {
                        let x = d * i as f64 / n as f64;
                        (q.eval(x) - base) * ((2 * j + 1) as f64 * PI * x / (2.0 * d)).cos()
                    })
                    .collect();
                2.0 / d * simpson(&f, d)
            })
            .collect();
        Self { coeffs, h }
    }
}

/// Composite Simpson rule on an even number of uniform intervals.
fn simpson(f: &[f64], len: f64) -> f64 {
    let n = f.len() - 1;
    debug_assert!(n % 2 == 0);
    let h = len / n as f64;
    let mut s = f[0] + f[n];
    for (i, v) in f.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

/// Bilinear interpolation of a field at `x` and times `ts`.
pub fn sample_field(field: &SpaceTimeField, x: f64, ts: &[f64]) -> Vec<f64> {
    let locate = |grid: &[f64], v: f64| -> (usize, f64) {
        let i = grid.partition_point(|g| *g <= v).clamp(1, grid.len() - 1) - 1;
        let w = ((v - grid[i]) / (grid[i + 1] - grid[i])).clamp(0.0, 1.0);
        (i, w)
    };
    let (ix, wx) = if field.x_grid.len() == 1 { (0, 0.0) } else { locate(&field.x_grid, x) };
    let row = |i: usize, t: f64| {
        let v = &field.values[i];
        if field.t_grid.len() == 1 {
            return v[0];
        }
        let (k, w) = locate(&field.t_grid, t);
        v[k] + w * (v[k + 1] - v[k])
    };
    ts.iter()
        .map(|&t| {
            let a = row(ix, t);
            if wx == 0.0 {
                a
            } else {
                a + wx * (row(ix + 1, t) - a)
            }
        })
        .collect()
}

fn robin(h: f64, big_h: f64) -> Result<RobinPair, InverseError> {
    Ok(RobinPair::new(h, big_h)?)
}

/// Inputs of [`synthesize_data`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSetup {
    pub alpha: f64,
    pub big_h: f64,
    pub eta: DriveSignal,
    pub x0: f64,
    pub t_samples: Vec<f64>,
    #[serde(default)]
    pub fd: FdSettings,
}

/// `u(x0, t_k)` from the L1-FD solver plus i.i.d. Gaussian noise of standard
/// deviation `noise_level * ||u|| / sqrt(K)`, so the expected noise norm is
/// `noise_level * ||u||`.
pub fn synthesize_data(
    truth: &ParameterSet,
    setup: &SynthesisSetup,
    noise_level: f64,
    seed: u64,
) -> Result<Vec<f64>, InverseError> {
    if !(noise_level >= 0.0) {
        return Err(InverseError::InvalidInput(format!("noise level {noise_level} must be >= 0")));
    }
    let field = solve_l1_fd(&truth.q, robin(truth.h, setup.big_h)?, setup.alpha, &setup.eta, setup.fd.nx, setup.fd.nt)?;
    let mut u = sample_field(&field, setup.x0, &setup.t_samples);
    if noise_level > 0.0 {
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let sigma = noise_level * norm / (u.len() as f64).sqrt();
        let dist = Normal::new(0.0, sigma).map_err(|e| InverseError::InvalidInput(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut u {
            *v += dist.sample(&mut rng);
        }
    }
    Ok(u)
}

/// Spectral prediction of `u(x0, t_k)` for a full parameter set.
pub fn predict(
    params: &ParameterSet,
    spec: &InverseProblemSpec,
) -> Result<Vec<f64>, InverseError> {
    let es = model_eigensystem(params, spec.big_h, spec.forward)?;
    // The series solver wants increasing times; samples may come in any order.
    let mut order: Vec<usize> = (0..spec.t_samples.len()).collect();
    order.sort_by(|&a, &b| spec.t_samples[a].total_cmp(&spec.t_samples[b]));
    let mut times: Vec<f64> = order.iter().map(|&i| spec.t_samples[i]).collect();
    times.dedup();
    let field = solve_spectral(&es, spec.alpha, &spec.eta, &[spec.x0], &times)?;
    let series = &field.values[0];
    Ok(spec
        .t_samples
        .iter()
        .map(|t| series[times.partition_point(|s| s < t)])
        .collect())
}

fn model_eigensystem(params: &ParameterSet, big_h: f64, s: SpectralSettings) -> Result<EigenSystem, InverseError> {
    Ok(eigen_system_with(&params.q, robin(params.h, big_h)?, s.n_max, EigenOptions { allow_inadmissible: true })?)
}

fn candidate_prediction(c: &CandidateParam, spec: &InverseProblemSpec) -> Result<Vec<f64>, InverseError> {
    let params = ParameterSet { q: c.potential(spec.d, &spec.q_tail, spec.forward.grid)?, h: c.h };
    predict(&params, spec)
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// `sum_k (u_candidate(x0, t_k) - data_k)^2 + gamma ||coeffs||^2`.
pub fn misfit(candidate: &CandidateParam, spec: &InverseProblemSpec, gamma: f64) -> Result<f64, InverseError> {
    spec.validate()?;
    candidate.validate()?;
    let pred = candidate_prediction(candidate, spec)?;
    let r: Vec<f64> = pred.iter().zip(&spec.data).map(|(p, d)| p - d).collect();
    Ok(sum_sq(&r) + gamma * sum_sq(&candidate.coeffs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    pub gamma: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub step_tol: f64,
    /// Relative finite-difference step for the Jacobian.
    pub fd_step: f64,
    /// Reject trial points whose `q` has a positive sample.
    pub project_q: bool,
    /// Keep `h` at its initial value.
    pub fix_h: bool,
    /// Ground truth for error metrics.
    pub truth: Option<ParameterSet>,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            gamma: 1e-10,
            max_iter: 200,
            grad_tol: 1e-8,
            step_tol: 1e-10,
            fd_step: 1e-6,
            project_q: false,
            fix_h: false,
            truth: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    GradientTolerance,
    StepTolerance,
    MaxIterations,
    /// Ten halvings failed to reduce the misfit after progress had been made.
    LineSearchExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regularization {
    pub gamma: f64,
    pub basis_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    /// `||q_hat - q||_{L2(0,d)} / ||q||_{L2(0,d)}`.
    pub rel_l2_q: f64,
    pub abs_err_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub q_hat: PotentialSpec,
    pub h_hat: f64,
    pub coeffs: Vec<f64>,
    pub misfit_history: Vec<f64>,
    pub regularization: Regularization,
    pub iterations: usize,
    pub termination: Termination,
    /// Final unpenalized residual norm `||u_hat - data||`.
    pub residual_norm: f64,
    pub warnings: Vec<String>,
    pub error_metrics: Option<ErrorMetrics>,
}

impl ReconstructionResult {
    /// CSV with header `iteration,misfit`.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iteration,misfit\n");
        for (i, m) in self.misfit_history.iter().enumerate() {
            out.push_str(&format!("{i},{m:e}\n"));
        }
        out
    }
}

/// `L2(0, d)` relative error of `q_hat` against `q`.
pub fn relative_l2_error(q_hat: &PotentialSpec, q: &PotentialSpec, d: f64) -> f64 {
    let n = 4000;
    let xs = (0..=n).map(|i| d * i as f64 / n as f64);
    let diff: Vec<f64> = xs.clone().map(|x| (q_hat.eval(x) - q.eval(x)).powi(2)).collect();
    let base: Vec<f64> = xs.map(|x| q.eval(x).powi(2)).collect();
    (simpson(&diff, d) / simpson(&base, d)).sqrt()
}

struct Model<'a> {
    spec: &'a InverseProblemSpec,
    fix_h: bool,
    fixed_h: f64,
    basis_dim: usize,
}

impl Model<'_> {
    fn unpack(&self, p: &[f64]) -> CandidateParam {
        let h = if self.fix_h { self.fixed_h } else { p[self.basis_dim] };
        CandidateParam { coeffs: p[..self.basis_dim].to_vec(), h }
    }

    fn residual(&self, p: &[f64]) -> Result<Vec<f64>, InverseError> {
        let pred = candidate_prediction(&self.unpack(p), self.spec)?;
        Ok(pred.iter().zip(&self.spec.data).map(|(a, b)| a - b).collect())
    }

    fn objective(&self, r: &[f64], p: &[f64], gamma: f64) -> f64 {
        sum_sq(r) + gamma * sum_sq(&p[..self.basis_dim])
    }

    fn feasible(&self, p: &[f64]) -> bool {
        let c = self.unpack(p);
        let n = 400;
        (0..=n).all(|i| c.q_at(self.spec.d * i as f64 / n as f64, self.spec.d, &self.spec.q_tail) <= 0.0)
    }
}

/// Gauss-Newton with Tikhonov penalty and step-halving line search.
///
/// A normal matrix with condition number above [`MAX_CONDITION`] is reported
/// in `warnings` and its diagonal is raised until the bound holds. When ten
/// halvings fail to lower the misfit, the step is recomputed with a diagonal
/// shift a hundred times larger, up to four times, before giving up.
pub fn reconstruct(
    spec: &InverseProblemSpec,
    init: &CandidateParam,
    opts: &ReconstructOptions,
) -> Result<ReconstructionResult, InverseError> {
    spec.validate()?;
    init.validate()?;
    let basis_dim = init.coeffs.len();
    let model = Model { spec, fix_h: opts.fix_h, fixed_h: init.h, basis_dim };
    let mut p: Vec<f64> = init.coeffs.clone();
    if !opts.fix_h {
        p.push(init.h);
    }
    if opts.project_q && !model.feasible(&p) {
        return Err(InverseError::InvalidInput("initial candidate violates q <= 0".into()));
    }
    let gamma = opts.gamma;
    let mut warnings = Vec::new();
    if !opts.fix_h {
        // The classifier is advisory here: reconstruction still runs outside the proven regions.
        if let Ok(v) = crate::uniqueness::classify_region(spec.d, spec.x0, None) {
            if v.verdict == crate::uniqueness::Verdict::Unknown {
                warnings.push(format!("(d, x0) = ({}, {}) lies outside the proven uniqueness regions", spec.d, spec.x0));
            }
        }
    }
    let mut r = model.residual(&p)?;
    let mut f = model.objective(&r, &p, gamma);
    let mut history = vec![f];
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    let np = p.len();

    while iterations < opts.max_iter {
        if np == 0 {
            termination = Termination::GradientTolerance;
            break;
        }
        let cols: Vec<Vec<f64>> = (0..np)
            .into_par_iter()
            .map(|i| {
                let step = opts.fd_step * p[i].abs().max(1.0);
                let mut q = p.clone();
                q[i] += step;
                let rq = model.residual(&q)?;
                Ok(rq.iter().zip(&r).map(|(a, b)| (a - b) / step).collect())
            })
            .collect::<Result<_, InverseError>>()?;
        let j = DMatrix::from_fn(r.len(), np, |k, i| cols[i][k]);
        let rv = DVector::from_column_slice(&r);
        let mut pen = DVector::zeros(np);
        for i in 0..basis_dim {
            pen[i] = gamma * p[i];
        }
        let mut grad = j.transpose() * &rv + &pen;
        let mut a = j.transpose() * &j;
        for i in 0..basis_dim {
            a[(i, i)] += gamma;
        }
        // h sits on its bound and the descent direction points outward: freeze it.
        if !opts.fix_h && p[basis_dim] == 0.0 && grad[basis_dim] > 0.0 {
            let k = basis_dim;
            grad[k] = 0.0;
            let diag = a[(k, k)].max(f64::MIN_POSITIVE);
            a.row_mut(k).fill(0.0);
            a.column_mut(k).fill(0.0);
            a[(k, k)] = diag;
        }
        if grad.norm() < opts.grad_tol {
            termination = Termination::GradientTolerance;
            break;
        }
        let eig = a.clone().symmetric_eigenvalues();
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), &v| (l.min(v), h.max(v)));
        let mut damping = 0.0;
        if !(lo > 0.0 && hi / lo < MAX_CONDITION) {
            warnings.push(format!(
                "iteration {iterations}: normal matrix condition estimate {:.3e}, damping raised",
                if lo > 0.0 { hi / lo } else { f64::INFINITY }
            ));
            damping = hi / MAX_CONDITION;
        }

        let mut accepted = None;
        for retry in 0..=DAMPING_RETRIES {
            let mut damped = a.clone();
            for i in 0..np {
                damped[(i, i)] += damping;
            }
            let Some(ch) = damped.cholesky() else {
                damping = (10.0 * damping).max(hi * 1e-12);
                continue;
            };
            let delta = ch.solve(&(-&grad));
            let mut t = 1.0;
            for _ in 0..10 {
                let mut trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + t * b).collect();
                if !opts.fix_h {
                    trial[basis_dim] = trial[basis_dim].max(0.0);
                }
                if !opts.project_q || model.feasible(&trial) {
                    if let Ok(rt) = model.residual(&trial) {
                        let ft = model.objective(&rt, &trial, gamma);
                        if ft <= f {
                            accepted = Some((trial, rt, ft));
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
            if retry < DAMPING_RETRIES {
                damping = (100.0 * damping).max(hi * 1e-10);
                warnings.push(format!("iteration {iterations}: line search failed, damping raised to {damping:.3e}"));
            }
        }
        iterations += 1;
        let Some((trial, rt, ft)) = accepted else {
            if history.len() == 1 {
                return Err(InverseError::DivergenceDetected { iteration: iterations, trials: 10 * (DAMPING_RETRIES + 1) });
            }
            termination = Termination::LineSearchExhausted;
            break;
        };
        let step_norm = trial.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let p_norm = sum_sq(&p).sqrt();
        p = trial;
        r = rt;
        f = ft;
        history.push(f);
        if step_norm <= opts.step_tol * p_norm.max(1e-300) {
            termination = Termination::StepTolerance;
            break;
        }
    }

    let cand = model.unpack(&p);
    let q_hat = cand.potential(spec.d, &spec.q_tail, spec.forward.grid)?;
    let error_metrics = opts.truth.as_ref().map(|t| ErrorMetrics {
        rel_l2_q: relative_l2_error(&q_hat, &t.q, spec.d),
        abs_err_h: (cand.h - t.h).abs(),
    });
    Ok(ReconstructionResult {
        q_hat,
        h_hat: cand.h,
        coeffs: cand.coeffs,
        misfit_history: history,
        regularization: Regularization { gamma, basis_dim },
        iterations,
        termination,
        residual_norm: sum_sq(&r).sqrt(),
        warnings,
        error_metrics,
    })
}

/// Morozov selection: runs [`reconstruct`] for each `gamma` in decreasing
/// order (warm-started) and returns the first result whose residual norm is
/// within `tau * noise_level * ||data||`, or the last one if none is.
pub fn reconstruct_discrepancy(
    spec: &InverseProblemSpec,
    init: &CandidateParam,
    opts: &ReconstructOptions,
    gammas: &[f64],
    tau: f64,
) -> Result<ReconstructionResult, InverseError> {
    if gammas.is_empty() || gammas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(InverseError::InvalidInput("gammas must be nonempty and decreasing".into()));
    }
    let target = tau * spec.noise_level * sum_sq(&spec.data).sqrt();
    let mut start = init.clone();
    let mut last = None;
    for &gamma in gammas {
        let res = reconstruct(spec, &start, &ReconstructOptions { gamma, ..opts.clone() })?;
        if res.residual_norm <= target {
            return Ok(res);
        }
        start = CandidateParam { coeffs: res.coeffs.clone(), h: res.h_hat };
        last = Some(res);
    }
    Ok(last.expect("at least one gamma"))
}

/// Shared forward setup of a distinguishability scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSetup {
    pub d: f64,
    #[serde(flatten)]
    pub synthesis: SynthesisSetup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTable {
    /// `max_k |u_1(x0, t_k) - u_2(x0, t_k)|` per pair.
    pub gaps: Vec<f64>,
    /// `max_k |u(x0, t_k)|` for the first member of each pair.
    pub scales: Vec<f64>,
    /// Discretization error estimate of the FD solver on the first pair:
    /// the change in `u(x0, t_k)` when both `nx` and `nt` are doubled.
    pub noise_floor: f64,
}

impl GapTable {
    /// CSV with header `pair,gap,scale,noise_floor`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pair,gap,scale,noise_floor\n");
        for (i, (g, s)) in self.gaps.iter().zip(&self.scales).enumerate() {
            out.push_str(&format!("{i},{g:e},{s:e},{:e}\n", self.noise_floor));
        }
        out
    }
}

/// Data gaps between pairs of parameter sets that agree on `[d, 1]`.
pub fn distinguishability_scan(
    pairs: &[(ParameterSet, ParameterSet)],
    setup: &ScanSetup,
) -> Result<GapTable, InverseError> {
    if pairs.is_empty() {
        return Err(InverseError::InvalidInput("no pairs to scan".into()));
    }
    for (index, (a, b)) in pairs.iter().enumerate() {
        if !a.q.agrees_on(&b.q, setup.d, 1e-12) {
            return Err(InverseError::MismatchedTails { index, d: setup.d });
        }
    }
    let syn = &setup.synthesis;
    let rows: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|(a, b)| {
            let ua = synthesize_data(a, syn, 0.0, 0)?;
            let ub = synthesize_data(b, syn, 0.0, 0)?;
            let gap = ua.iter().zip(&ub).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
            let scale = ua.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            Ok((gap, scale))
        })
        .collect::<Result<_, InverseError>>()?;
    let fine = SynthesisSetup { fd: FdSettings { nx: 2 * syn.fd.nx, nt: 2 * syn.fd.nt }, ..syn.clone() };
    let coarse_u = synthesize_data(&pairs[0].0, syn, 0.0, 0)?;
    let fine_u = synthesize_data(&pairs[0].0, &fine, 0.0, 0)?;
    let noise_floor = coarse_u.iter().zip(&fine_u).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(GapTable { gaps: rows.iter().map(|r| r.0).collect(), scales: rows.iter().map(|r| r.1).collect(), noise_floor })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchRow {
    pub n: usize,
    pub m: usize,
    pub lambda_gap: f64,
    pub trace_gap: f64,
    pub matched: bool,
}

/// Modes of `es1` visible at `x0` and their closest partners in `es2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub rows: Vec<MatchRow>,
    pub audited: usize,
    pub matched: usize,
}

/// Pairs each mode `n` of `es1` with `|e_n(x0)| > 1e-6 max|e_n|` to the
/// nearest eigenvalue `m` of `es2` and compares `lambda` and
/// `e(1) e(x0)`, which is invariant under the sign of the eigenfunction.
pub fn spectral_match_audit(es1: &EigenSystem, es2: &EigenSystem, x0: f64, tol: f64) -> MatchReport {
    let rows: Vec<MatchRow> = (0..es1.len())
        .filter(|&n| {
            let emax = es1.efuncs[n].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            es1.e(n, x0).abs() > 1e-6 * emax
        })
        .filter_map(|n| {
            let l = es1.lambdas[n];
            let m = (0..es2.len()).min_by(|&a, &b| (es2.lambdas[a] - l).abs().total_cmp(&(es2.lambdas[b] - l).abs()))?;
            let lambda_gap = (es2.lambdas[m] - l).abs();
            let trace_gap = (es1.e_at_one(n) * es1.e(n, x0) - es2.e_at_one(m) * es2.e(m, x0)).abs();
            Some(MatchRow { n, m, lambda_gap, trace_gap, matched: lambda_gap <= tol && trace_gap <= tol })
        })
        .collect();
    let matched = rows.iter().filter(|r| r.matched).count();
    MatchReport { audited: rows.len(), matched, rows }
}

/// The reference twin problem: `alpha = 0.5`, `d = 0.5`, `x0 = 0.6`,
/// `q(x) = -0.8 (1 - x/d)^2` on `[0, d]` and zero beyond, `h = 0.5`, `H = 0`,
/// driven by `eta(t) = sin(pi t / 2)` on `[0, 2]`.
pub fn reference_twin() -> Result<(ParameterSet, SynthesisSetup, f64), InverseError> {
    let d = 0.5;
    let q = PotentialSpec::from_fn(2048, |x| if x < d { -0.8 * (1.0 - x / d).powi(2) } else { 0.0 })?;
    let eta = DriveSignal::uniform(2.0, 512, |t| (0.5 * PI * t).sin(), "sin(pi t / 2)")?;
    let t_samples: Vec<f64> = (1..=64).map(|k| 2.0 * k as f64 / 64.0).collect();
    let setup = SynthesisSetup { alpha: 0.5, big_h: 0.0, eta, x0: 0.6, t_samples, fd: FdSettings::default() };
    Ok((ParameterSet { q, h: 0.5 }, setup, d))
}

/// Builds the problem spec for data synthesized from `truth`.
pub fn twin_spec(
    truth: &ParameterSet,
    setup: &SynthesisSetup,
    d: f64,
    noise_level: f64,
    seed: u64,
) -> Result<InverseProblemSpec, InverseError> {
    let data = synthesize_data(truth, setup, noise_level, seed)?;
    let spec = InverseProblemSpec {
        alpha: setup.alpha,
        x0: setup.x0,
        d,
        q_tail: truth.q.clone(),
        big_h: setup.big_h,
        eta: setup.eta.clone(),
        t_samples: setup.t_samples.clone(),
        data,
        noise_level,
        forward: SpectralSettings::default(),
    };
    spec.validate()?;
    Ok(spec)
}
