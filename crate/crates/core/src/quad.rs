//! Quadrature helpers on uniform grids.

/// Trapezoid rule on a uniform grid over `[0, len]` with the Euler-Maclaurin
/// endpoint correction `- h^2/12 (f'(end) - f'(start))`.
///
/// The shooting solver carries first derivatives at every node, so the
/// correction costs nothing and lifts the rule to fourth order.
pub fn trapezoid_corrected(values: &[f64], d_start: f64, d_end: f64, len: f64) -> f64 {
    let n = values.len() - 1;
    let h = len / n as f64;
    trapezoid(values, len) - h * h / 12.0 * (d_end - d_start)
}

/// Plain composite trapezoid on a uniform grid over `[0, len]`.
pub fn trapezoid(values: &[f64], len: f64) -> f64 {
    let n = values.len() - 1;
    let h = len / n as f64;
    let inner: f64 = values[1..n].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n]))
}

/// Cumulative trapezoid on a possibly nonuniform grid; `out[0] = 0`.
pub fn cumulative_trapezoid(t: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..t.len() {
        acc += 0.5 * (t[i] - t[i - 1]) * (values[i] + values[i - 1]);
        out.push(acc);
    }
    out
}
