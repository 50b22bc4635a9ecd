//! Scalar root finding on a sign-changing bracket.

/// Brent's method for `f(x) = 0` on `[a, b]` with `f(a) f(b) <= 0`.
///
/// `fa` and `fb` are the already-known end values. Returns the root and the
/// residual there, or `None` if the bracket does not change sign.
pub(crate) fn brent<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<Option<(f64, f64)>, E> {
    if fa == 0.0 {
        return Ok(Some((a, 0.0)));
    }
    if fb == 0.0 {
        return Ok(Some((b, 0.0)));
    }
    if fa.signum() == fb.signum() {
        return Ok(None);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(Some((b, fb)));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Ok(Some((b, fb)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let f = |x: f64| Ok::<_, ()>(x * x * x - 2.0);
        let (r, _) = brent(f, 0.0, 2.0, -2.0, 6.0, 1e-15, 100).unwrap().unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_same_sign() {
        let f = |x: f64| Ok::<_, ()>(x * x + 1.0);
        assert!(brent(f, -1.0, 1.0, 2.0, 2.0, 1e-12, 50).unwrap().is_none());
    }
}
