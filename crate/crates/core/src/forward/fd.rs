use super::{check_alpha, DriveSignal, FieldMethod, ForwardError, Resolution, SpaceTimeField};
use crate::mittleff::l1_weights;
use crate::sl::{PotentialSpec, RobinPair};

/// Implicit L1 scheme in time, central differences in space, Robin data via
/// ghost nodes `u_{-1} = u_1 - 2 dx h u_0` and
/// `u_{nx+1} = u_{nx-1} + 2 dx (eta - H u_nx)`.
///
/// The time grid is uniform on `[0, T]` with `T` the end of the drive
/// support; the drive is interpolated piecewise-linearly onto it.
pub fn solve_l1_fd(
    q: &PotentialSpec,
    robin: RobinPair,
    alpha: f64,
    eta: &DriveSignal,
    nx: usize,
    nt: usize,
) -> Result<SpaceTimeField, ForwardError> {
    check_alpha(alpha)?;
    if nx < 32 || nt < 32 {
        return Err(ForwardError::InvalidInput(format!("need nx, nt >= 32 (got {nx}, {nt})")));
    }
    let t_end = eta.t_end();
    let tau = t_end / nt as f64;
    let dx = 1.0 / nx as f64;
    let a = 1.0 / (dx * dx);
    let b = l1_weights(alpha, tau, nt).weights;
    let x_grid: Vec<f64> = (0..=nx).map(|i| i as f64 * dx).collect();
    let t_grid: Vec<f64> = (0..=nt).map(|k| k as f64 * tau).collect();
    let qx: Vec<f64> = x_grid.iter().map(|&x| q.eval(x)).collect();

    // Constant tridiagonal matrix: sub, diag, sup.
    let m = nx + 1;
    let mut sub = vec![-a; m];
    let mut sup = vec![-a; m];
    let mut diag: Vec<f64> = qx.iter().map(|qi| b[0] + 2.0 * a - qi).collect();
    sub[0] = 0.0;
    sup[0] = -2.0 * a;
    diag[0] += 2.0 * a * dx * robin.h;
    sub[nx] = -2.0 * a;
    sup[nx] = 0.0;
    diag[nx] += 2.0 * a * dx * robin.big_h;

    // Thomas factorization, reused every step.
    let mut c_prime = vec![0.0; m];
    let mut denom = vec![0.0; m];
    for i in 0..m {
        let d = if i == 0 { diag[0] } else { diag[i] - sub[i] * c_prime[i - 1] };
        if d.abs() < 1e-300 || !d.is_finite() {
            return Err(ForwardError::LinearSolveFailure { step: 0, row: i });
        }
        denom[i] = d;
        c_prime[i] = sup[i] / d;
    }

    // levels[k][i] = u(x_i, t_k)
    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(nt + 1);
    levels.push(vec![0.0; m]);
    let mut incr: Vec<Vec<f64>> = Vec::with_capacity(nt);
    let mut rhs = vec![0.0; m];
    for k in 1..=nt {
        let prev = &levels[k - 1];
        for i in 0..m {
            let mut hist = 0.0;
            // sum_{j=1}^{k-1} b_j (u^{k-j} - u^{k-j-1})
            for j in 1..k {
                hist += b[j] * incr[k - j - 1][i];
            }
            rhs[i] = b[0] * prev[i] - hist;
        }
        rhs[nx] += 2.0 * a * dx * eta.eval(t_grid[k]);
        // Forward sweep then back substitution.
        let mut y = vec![0.0; m];
        for i in 0..m {
            let r = if i == 0 { rhs[0] } else { rhs[i] - sub[i] * y[i - 1] };
            y[i] = r / denom[i];
        }
        for i in (0..nx).rev() {
            y[i] -= c_prime[i] * y[i + 1];
        }
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(ForwardError::LinearSolveFailure { step: k, row });
        }
        incr.push(y.iter().zip(prev).map(|(u, p)| u - p).collect());
        levels.push(y);
    }
    let values = (0..m).map(|i| levels.iter().map(|l| l[i]).collect()).collect();
    Ok(SpaceTimeField {
        x_grid,
        t_grid,
        values,
        method: FieldMethod::L1fd,
        resolution: Resolution::Grid { nx, nt },
    })
}
