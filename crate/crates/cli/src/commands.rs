//! One function per command: build inputs, call the library, write artifacts,
//! return the embedded checks.

use std::f64::consts::PI;
use std::fmt::Write as _;

use fracsl::forward::{
    duhamel_residual, kernel_k, solve_l1_fd, solve_spectral, solve_spectral_with, DriveSignal, SpectralOptions,
};
use fracsl::inverse::{
    distinguishability_scan, reconstruct as run_inverse, reference_twin, sample_field, synthesize_data, twin_spec,
    CandidateParam, ParameterSet, ReconstructOptions, ScanSetup,
};
use fracsl::mittleff::{ml, ml_laplace_residual};
use fracsl::quad::cumulative_trapezoid;
use fracsl::sl::{eigen_system, split_spectra, verify_asymptotics, verify_split_asymptotics, PotentialSpec, RobinPair};
use fracsl::uniqueness::{
    classify_region, complement_inclusion_check, counting as count_below, counting_bound_check, lambda_set,
    region_map as build_region_map, Certificate, CountedSet, SetLabel, Verdict,
};
use fracsl::weyl::{m_asymptotic_scan, scan_to_csv, wronskian_profile, ComplexRay, RayDirection};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{
    robin, CountingParams, Direction, DistinguishParams, EigensolveParams, ForwardMethod, ForwardParams, KernelParams,
    ReconstructParams, RegionMapParams, VerifyAllParams, WeylScanParams,
};
use crate::manifest::{Artifacts, CheckResult};
use crate::plot::PlotSpec;
use crate::RunError;

type Checks = Result<Vec<CheckResult>, RunError>;

/// Fixed-width scientific formatting for CSV cells; `{:e}` alone prints the
/// shortest round-trip form, which is exact and deterministic too, but a
/// fixed width keeps files diffable across small numeric changes.
fn cell(v: f64) -> String {
    format!("{v:.12e}")
}

fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (step * i as f64).exp()).collect()
}

fn uniform_times(t_end: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| t_end * k as f64 / steps as f64).collect()
}

pub(crate) fn eigensolve(p: &EigensolveParams, art: &mut Artifacts) -> Checks {
    let q = p.potential.build()?;
    let r = robin(p.h, p.big_h)?;
    let es = eigen_system(&q, r, p.n_max)?;
    let mut csv = String::from("n,lambda,k,beta,residual\n");
    for n in 0..es.len() {
        let _ = writeln!(csv, "{n},{},{},{},{}", cell(es.lambdas[n]), cell(es.k[n]), cell(es.beta[n]), cell(es.residuals[n]));
    }
    art.write_plotted_csv("eigenvalues", &csv, &PlotSpec::line("n", &["lambda"], "eigenvalues"))?;

    let shown = es.len().min(5);
    let names: Vec<String> = (0..shown).map(|n| format!("e{n}")).collect();
    let mut csv = format!("x,{}\n", names.join(","));
    for i in 0..=200 {
        let x = i as f64 / 200.0;
        let row: Vec<String> = (0..shown).map(|n| cell(es.e(n, x))).collect();
        let _ = writeln!(csv, "{},{}", cell(x), row.join(","));
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    art.write_plotted_csv("eigenfunctions", &csv, &PlotSpec::line("x", &refs, "eigenfunctions"))?;

    let mut checks = vec![CheckResult::at_most("orthonormality_defect", es.orthonormality_defect(), 1e-8)];
    let miscounted = (0..es.len()).filter(|&n| es.sign_changes(n) != n).count();
    checks.push(CheckResult::at_most("oscillation_miscounts", miscounted as f64, 0.0));
    if es.len() >= 20 {
        let rep = verify_asymptotics(&es)?;
        art.write_json("asymptotics.json", &rep)?;
        checks.push(CheckResult::flag("asymptotics_bounded", rep.pass).with_detail(format!("drift {:.3e}", rep.drift)));
    }
    if let Some(x0) = p.x0 {
        let (minus, plus) = split_spectra(&q, x0, r, p.n_max)?;
        let mut csv = String::from("n,mu_minus,mu_plus\n");
        for (n, (a, b)) in minus.iter().zip(&plus).enumerate() {
            let _ = writeln!(csv, "{n},{},{}", cell(*a), cell(*b));
        }
        art.write("split_spectra.csv", csv.as_bytes())?;
        if minus.len() >= 20 {
            checks.push(CheckResult::flag("split_asymptotics_minus", verify_split_asymptotics(&minus, x0)?.pass));
            checks.push(CheckResult::flag("split_asymptotics_plus", verify_split_asymptotics(&plus, 1.0 - x0)?.pass));
        }
    }
    Ok(checks)
}

/// Largest entry-wise gap between two sets of series, relative to `scale`.
fn max_gap(a: &[Vec<f64>], b: &[Vec<f64>], scale: f64) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

pub(crate) fn forward(p: &ForwardParams, art: &mut Artifacts) -> Checks {
    let q = p.potential.build()?;
    let r = robin(p.h, p.big_h)?;
    let eta = p.drive.build()?;
    let times = uniform_times(eta.t_end(), p.t_steps);
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    let mut checks = Vec::new();

    let spectral = if p.method != ForwardMethod::Fd {
        let es = eigen_system(&q, r, p.n_modes - 1)?;
        let field = solve_spectral(&es, p.alpha, &eta, &p.x_points, &times)?;
        checks.push(CheckResult::flag("spectral_finite", field.is_finite()));
        for (x, row) in p.x_points.iter().zip(&field.values) {
            columns.push((format!("spectral@{x}"), row.clone()));
        }
        Some(field.values)
    } else {
        None
    };
    if p.method != ForwardMethod::Spectral {
        let sample = |nx: usize, nt: usize| -> Result<Vec<Vec<f64>>, RunError> {
            let field = solve_l1_fd(&q, r, p.alpha, &eta, nx, nt)?;
            Ok(p.x_points.iter().map(|&x| sample_field(&field, x, &times)).collect())
        };
        let fine = sample(p.fd.nx, p.fd.nt)?;
        checks.push(CheckResult::flag("fd_finite", fine.iter().flatten().all(|v| v.is_finite())));
        for (x, row) in p.x_points.iter().zip(&fine) {
            columns.push((format!("fd@{x}"), row.clone()));
        }
        if let Some(spec) = &spectral {
            let coarse = sample((p.fd.nx / 2).max(32), (p.fd.nt / 2).max(32))?;
            let scale = spec.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            let budget = max_gap(&fine, &coarse, scale);
            let diff = max_gap(spec, &fine, scale);
            checks.push(
                CheckResult::at_most("spectral_vs_fd", diff, p.cross_tolerance + budget)
                    .with_detail(format!("refinement budget {budget:.3e}")),
            );
        }
    }
    let names: Vec<&str> = columns.iter().map(|c| c.0.as_str()).collect();
    let mut csv = format!("t,{}\n", names.join(","));
    for (k, t) in times.iter().enumerate() {
        let row: Vec<String> = columns.iter().map(|c| cell(c.1[k])).collect();
        let _ = writeln!(csv, "{},{}", cell(*t), row.join(","));
    }
    art.write_plotted_csv("field", &csv, &PlotSpec::line("t", &names, "u(x, t)"))?;
    Ok(checks)
}

pub(crate) fn kernel(p: &KernelParams, art: &mut Artifacts) -> Checks {
    let q = p.potential.build()?;
    let r = robin(p.h, p.big_h)?;
    let es = eigen_system(&q, r, p.n_modes - 1)?;
    let times = uniform_times(p.t_end, p.t_steps);
    let k = kernel_k(&es, p.alpha, p.x, &times, es.len())?;
    let mut csv = String::from("t,K\n");
    for (t, v) in times.iter().zip(&k.values) {
        let _ = writeln!(csv, "{},{}", cell(*t), cell(*v));
    }
    art.write_plotted_csv("kernel", &csv, &PlotSpec::line("t", &["K"], &format!("K({}, t)", p.x)))?;
    let mut checks = vec![
        CheckResult::at_most("kernel_at_zero", k.values[0].abs(), 0.0),
        CheckResult::flag("kernel_finite", k.values.iter().all(|v| v.is_finite())),
    ];
    if let Some(drive) = &p.drive {
        let eta = drive.build()?;
        let opts = SpectralOptions { tail_correction: false, tail_tolerance: f64::INFINITY };
        let field = solve_spectral_with(&es, p.alpha, &eta, &[p.x], &times, opts)?;
        let res = duhamel_residual(&field, &k, &eta)?;
        let scale = cumulative_trapezoid(&times, &field.values[0]).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        checks.push(
            CheckResult::at_most("duhamel_relative", res / scale.max(f64::MIN_POSITIVE), p.duhamel_tolerance)
                .with_detail(format!("absolute residual {res:.3e}, scale {scale:.3e}")),
        );
    }
    Ok(checks)
}

pub(crate) fn weyl_scan(p: &WeylScanParams, art: &mut Artifacts) -> Checks {
    let q = p.potential.build()?;
    let dir = match p.direction {
        Direction::Imaginary => RayDirection::ImaginaryAxis,
        Direction::Sector => RayDirection::Sector(p.angle),
    };
    let ray = ComplexRay::geometric(dir, p.magnitude_min, p.magnitude_max, p.count)?;
    let fit = m_asymptotic_scan(&q, p.h, p.x, &ray)?;
    art.write("scan.csv", scan_to_csv(&fit.samples).as_bytes())?;
    let mut csv = String::from("abs_lambda,abs_m,fit\n");
    for s in &fit.samples {
        let a = s.lambda.norm();
        let _ = writeln!(csv, "{},{},{}", cell(a), cell(s.value.norm()), cell(fit.coefficient * a.powf(fit.exponent)));
    }
    art.write_plotted_csv("magnitude", &csv, &PlotSpec::line("abs_lambda", &["abs_m", "fit"], "|m-| along the ray").log_log())?;
    #[derive(serde::Serialize)]
    struct Summary {
        exponent: f64,
        coefficient: f64,
        residual: f64,
        alternative_exponent: f64,
    }
    art.write_json(
        "fit.json",
        &Summary {
            exponent: fit.exponent,
            coefficient: fit.coefficient,
            residual: fit.residual,
            alternative_exponent: fit.alternative_exponent,
        },
    )?;
    Ok(vec![CheckResult::at_most("exponent_error", (fit.exponent - p.expected_exponent).abs(), p.exponent_tolerance)
        .with_detail(format!("fitted exponent {:.6}", fit.exponent))])
}

pub(crate) fn counting(p: &CountingParams, art: &mut Artifacts) -> Checks {
    let q = p.potential.build()?;
    let r = robin(p.h, p.big_h)?;
    let es = eigen_system(&q, r, p.n_max)?;
    let split = lambda_set(&es, p.x0, p.tau)?;
    let mut audit = String::from("n,lambda,e_x0,e_max,in_lambda,near_threshold\n");
    for m in &split.audit {
        let _ = writeln!(
            audit,
            "{},{},{},{},{},{}",
            m.index,
            cell(m.lambda),
            cell(m.e_x0),
            cell(m.e_max),
            m.in_lambda,
            m.near_threshold
        );
    }
    art.write("lambda_audit.csv", audit.as_bytes())?;

    let sigma = CountedSet::new(es.lambdas.clone(), SetLabel::FullSpectrum)?;
    let top = *es.lambdas.last().expect("at least 21 modes");
    let lo = es.lambdas.iter().copied().find(|&l| l > 1.0).unwrap_or(1.0);
    let grid = geometric_grid(lo, top, p.s_points);
    let bound = counting_bound_check(&split.lambda, p.x0, &grid)?;
    let mut csv = String::from("s,n_sigma,n_lambda,bound\n");
    for row in &bound.rows {
        let _ = writeln!(csv, "{},{},{},{}", cell(row.s), count_below(&sigma, row.s), row.count, cell(row.bound));
    }
    art.write_plotted_csv("counting", &csv, &PlotSpec::line("s", &["n_sigma", "n_lambda", "bound"], "counting functions"))?;
    let inclusion = complement_inclusion_check(&es, p.x0, p.tau, 1e-6)?;
    art.write_json("inclusion.json", &inclusion)?;
    Ok(vec![
        CheckResult::flag("counting_bound", bound.pass),
        CheckResult::flag("complement_inclusion", inclusion.pass)
            .with_detail(format!("{} complement members checked", inclusion.checked)),
    ])
}

pub(crate) fn region_map(p: &RegionMapParams, art: &mut Artifacts) -> Checks {
    let cert = p.certificate.map(|c| Certificate { a: c.a, b: c.b });
    let map = build_region_map(p.resolution, cert)?;
    let csv = map.to_csv();
    art.write_plotted_csv("region_map", &csv, &PlotSpec::heatmap("d", "x0", "verdict", "uniqueness regions"))?;
    let rows = csv.lines().count() - 1;
    Ok(vec![CheckResult::at_most("row_count_mismatch", (rows as f64 - (p.resolution * p.resolution) as f64).abs(), 0.0)])
}

pub(crate) fn reconstruct(p: &ReconstructParams, seed: u64, art: &mut Artifacts) -> Checks {
    let (truth, setup, d) = reference_twin()?;
    let spec = twin_spec(&truth, &setup, d, p.noise_level, seed)?;
    art.write("data.csv", spec.data_to_csv().as_bytes())?;
    let opts = ReconstructOptions {
        gamma: p.gamma,
        max_iter: p.max_iter,
        project_q: p.project_q,
        truth: Some(truth.clone()),
        ..ReconstructOptions::default()
    };
    let result = run_inverse(&spec, &CandidateParam::neutral(p.basis_dim), &opts)?;
    art.write_plotted_csv("history", &result.history_csv(), &PlotSpec::line("iteration", &["misfit"], "misfit"))?;
    let mut csv = String::from("x,q_hat,q_true\n");
    for i in 0..=200 {
        let x = d * i as f64 / 200.0;
        let _ = writeln!(csv, "{},{},{}", cell(x), cell(result.q_hat.eval(x)), cell(truth.q.eval(x)));
    }
    art.write_plotted_csv("potential", &csv, &PlotSpec::line("x", &["q_hat", "q_true"], "reconstructed potential"))?;
    art.write_json("result.json", &result)?;
    let metrics = result.error_metrics.expect("truth supplied");
    Ok(vec![
        CheckResult::at_most("rel_l2_q", metrics.rel_l2_q, p.rel_l2_threshold),
        CheckResult::at_most("abs_err_h", metrics.abs_err_h, p.h_threshold),
    ])
}

/// Random admissible parameter pairs that agree on `[d, 1]`: each potential is
/// `-|c1 s^2 + c2 s^3 + c3 s^4|` with `s = 1 - x/d` on `[0, d)`.
pub fn random_pairs(count: usize, amplitude: f64, d: f64, seed: u64) -> Result<Vec<(ParameterSet, ParameterSet)>, RunError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Result<ParameterSet, RunError> {
        let c: [f64; 3] = [rng.gen_range(0.0..amplitude), rng.gen_range(0.0..amplitude), rng.gen_range(0.0..amplitude)];
        let h = rng.gen_range(0.0..1.0);
        let q = PotentialSpec::from_fn(2048, |x| {
            if x < d {
                let s = 1.0 - x / d;
                -(c[0] * s * s + c[1] * s.powi(3) + c[2] * s.powi(4)).abs()
            } else {
                0.0
            }
        })?;
        Ok(ParameterSet { q, h })
    };
    (0..count).map(|_| Ok((draw(&mut rng)?, draw(&mut rng)?))).collect()
}

pub(crate) fn distinguish(p: &DistinguishParams, seed: u64, art: &mut Artifacts) -> Checks {
    let (_, synthesis, d) = reference_twin()?;
    let pairs = random_pairs(p.pairs, p.amplitude, d, seed)?;
    let setup = ScanSetup { d, synthesis };
    let table = distinguishability_scan(&pairs, &setup)?;
    let same_a = synthesize_data(&pairs[0].0, &setup.synthesis, 0.0, 0)?;
    let same_b = synthesize_data(&pairs[0].0.clone(), &setup.synthesis, 0.0, 0)?;
    let same_gap = same_a.iter().zip(&same_b).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    art.write_plotted_csv("gaps", &table.to_csv(), &PlotSpec::line("pair", &["gap", "noise_floor"], "data gaps"))?;
    let min_gap = table.gaps.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(vec![
        CheckResult::at_least("min_gap_over_floor", min_gap / table.noise_floor, p.floor_factor)
            .with_detail(format!("min gap {min_gap:.3e}, floor {:.3e}", table.noise_floor)),
        CheckResult::at_most("identical_pair_gap", same_gap, table.noise_floor),
    ])
}

/// Reference suite on the free operator `q = 0` with Neumann data plus the
/// parameter-free parts of the library.
pub(crate) fn verify_all(p: &VerifyAllParams, art: &mut Artifacts) -> Checks {
    let mut checks = Vec::new();
    let q = PotentialSpec::zero(2048);
    let r = RobinPair::neumann();

    let es = eigen_system(&q, r, p.n_max)?;
    let mut csv = String::from("n,lambda,exact\n");
    let mut worst_value = es.lambdas[0].abs();
    let mut worst_fn = 0.0_f64;
    for n in 0..es.len() {
        let exact = (n as f64 * PI).powi(2);
        let _ = writeln!(csv, "{n},{},{}", cell(es.lambdas[n]), cell(exact));
        if n > 0 {
            worst_value = worst_value.max((es.lambdas[n] - exact).abs() / exact);
        }
        for i in 0..=200 {
            let x = i as f64 / 200.0;
            let want = if n == 0 { 1.0 } else { 2f64.sqrt() * (n as f64 * PI * x).cos() };
            worst_fn = worst_fn.max((es.e(n, x) - want).abs());
        }
    }
    art.write_plotted_csv("eigenvalues", &csv, &PlotSpec::line("n", &["lambda", "exact"], "free spectrum"))?;
    checks.push(CheckResult::at_most("free_eigenvalues", worst_value, 1e-8));
    checks.push(CheckResult::at_most("free_eigenfunctions", worst_fn, 1e-6));
    checks.push(CheckResult::flag("free_asymptotics", verify_asymptotics(&es)?.pass));

    let mut csv = String::from("x,E,exp\n");
    let mut worst = 0.0_f64;
    for i in 0..=100 {
        let x = 0.5 * i as f64;
        let e = ml(1.0, 1.0, -x)?;
        let _ = writeln!(csv, "{},{},{}", cell(x), cell(e), cell((-x).exp()));
        worst = worst.max((e - (-x).exp()).abs());
    }
    art.write("mittag_leffler.csv", csv.as_bytes())?;
    checks.push(CheckResult::at_most("ml_alpha_one", worst, 1e-12));
    let mut worst = 0.0_f64;
    for alpha in [0.3, 0.6, 0.9] {
        worst = worst.max(ml_laplace_residual(alpha, 2.0, 1.5)?);
    }
    checks.push(CheckResult::at_most("ml_laplace", worst, 1e-6));

    let eta = DriveSignal::uniform(1.0, 200, |t| t, "t")?;
    let times = uniform_times(1.0, 32);
    let xs = [0.0, 0.5, 1.0];
    let spec = solve_spectral(&eigen_system(&PotentialSpec::zero(512), r, 63)?, 0.5, &eta, &xs, &times)?;
    let fd = |nx: usize, nt: usize| -> Result<Vec<Vec<f64>>, RunError> {
        let f = solve_l1_fd(&PotentialSpec::zero(512), r, 0.5, &eta, nx, nt)?;
        Ok(xs.iter().map(|&x| sample_field(&f, x, &times)).collect())
    };
    let (fine, coarse) = (fd(128, 256)?, fd(64, 128)?);
    let scale = spec.max_abs();
    let mut csv = String::from("t,spectral,fd\n");
    for (k, t) in times.iter().enumerate() {
        let _ = writeln!(csv, "{},{},{}", cell(*t), cell(spec.values[2][k]), cell(fine[2][k]));
    }
    art.write_plotted_csv("forward", &csv, &PlotSpec::line("t", &["spectral", "fd"], "u(1, t)"))?;
    let budget = max_gap(&fine, &coarse, scale);
    checks.push(CheckResult::at_most("forward_cross", max_gap(&spec.values, &fine, scale), 1e-3 + budget));

    let squares = CountedSet::new((0..=2000).map(|n| (n as f64 * PI).powi(2)).collect(), SetLabel::FullSpectrum)?;
    let mut csv = String::from("s,count,weyl\n");
    for s in geometric_grid(10.0, 1e6, 25) {
        let _ = writeln!(csv, "{},{},{}", cell(s), count_below(&squares, s), cell(s.sqrt() / PI));
    }
    art.write_plotted_csv("counting", &csv, &PlotSpec::line("s", &["count", "weyl"], "N(s)").log_log())?;
    let density = count_below(&squares, 1e6) as f64 / 1e3;
    checks.push(CheckResult::at_most("counting_density", (density * PI - 1.0).abs(), 0.05));

    let map = build_region_map(20, None)?;
    art.write_plotted_csv("region_map", &map.to_csv(), &PlotSpec::heatmap("d", "x0", "verdict", "regions"))?;
    checks.push(CheckResult::at_most("region_cells", (map.cells.len() as f64 - 400.0).abs(), 0.0));
    let spot = [
        (0.3, 0.5, Verdict::Theorem1CaseI),
        (0.2, 0.1, Verdict::Theorem1CaseIi),
        (0.45, 0.3, Verdict::Unknown),
        (0.7, 0.2, Verdict::Unknown),
    ];
    let wrong = spot.iter().filter(|(d, x0, v)| classify_region(*d, *x0, None).map(|r| r.verdict) != Ok(*v)).count();
    checks.push(CheckResult::at_most("region_spot_checks", wrong as f64, 0.0));

    let d = 0.4;
    let bump = PotentialSpec::from_fn(2048, |x| if x < d { -(1.0 - x / d).powi(2) } else { 0.0 })?;
    let mut worst = 0.0_f64;
    for lam in [Complex64::new(10.0, 0.0), Complex64::new(80.0, 5.0)] {
        let u = wronskian_profile(&bump, &q, 0.0, 0.0, lam, 2048)?;
        let last = u[2048];
        let start = (d * 2048.0).ceil() as usize;
        let w = u[start..].iter().map(|v| (v - last).norm()).fold(0.0, f64::max) / (1.0 + last.norm());
        worst = worst.max(w);
    }
    checks.push(CheckResult::at_most("wronskian_constancy", worst, 1e-8));
    Ok(checks)
}
