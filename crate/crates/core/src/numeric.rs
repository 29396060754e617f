//! Small scalar numerics shared by the solvers.

/// Brent's method on a bracketing interval. `fa` and `fb` are f(a), f(b) and must
/// not have the same strict sign. Returns the root or the last bracket on
/// failure to converge in `max_iter` steps.
pub fn brent<F, E>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64, BrentFailure<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(BrentFailure::NotBracketed { a, b });
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b).map_err(BrentFailure::Function)?;
    }
    Err(BrentFailure::NoConvergence { a: b, b: c })
}

#[derive(Debug, Clone, PartialEq)]
pub enum BrentFailure<E> {
    NotBracketed { a: f64, b: f64 },
    NoConvergence { a: f64, b: f64 },
    Function(E),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let f = |x: f64| Ok::<_, ()>(x * x * x - 2.0);
        let r = brent(f, 0.0, 3.0, -2.0, 25.0, 1e-15, 100).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_unbracketed() {
        let f = |x: f64| Ok::<_, ()>(x * x + 1.0);
        assert!(matches!(
            brent(f, -1.0, 1.0, 2.0, 2.0, 1e-12, 50),
            Err(BrentFailure::NotBracketed { .. })
        ));
    }
}
