//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Illinois regula falsi on `[a, b]` with `f(a)`, `f(b)` of opposite sign.
/// Stops when `|f| <= ftol` or the bracket is narrower than `xtol`.
pub(crate) fn illinois(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
    ftol: f64,
) -> Result<(f64, f64)> {
    if fa == 0.0 {
        return Ok((a, fa));
    }
    if fb == 0.0 {
        return Ok((b, fb));
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(Error::NoRoot(format!("no sign change on [{a}, {b}]")));
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a.min(b) && x < a.max(b)) {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        if fx.abs() <= ftol || (b - a).abs() <= xtol {
            return Ok((x, fx));
        }
        if (fx > 0.0) == (fb > 0.0) {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
    }
    let x = if fa.abs() < fb.abs() { a } else { b };
    Ok((x, fa.abs().min(fb.abs())))
}

/// Secant iteration from two starting points; returns `(x, f(x))`.
pub(crate) fn secant(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut x0: f64,
    mut x1: f64,
    ftol: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<(f64, f64)> {
    let mut f0 = f(x0)?;
    if f0.abs() <= ftol {
        return Ok((x0, f0));
    }
    let mut f1 = f(x1)?;
    for _ in 0..max_iter {
        if f1.abs() <= ftol {
            return Ok((x1, f1));
        }
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !x2.is_finite() {
            break;
        }
        let f2 = f(x2)?;
        // sign change: finish by bracketing
        if (f2 > 0.0) != (f1 > 0.0) && f2 != 0.0 && f1 != 0.0 {
            let (a, b, fa, fb) = if x1 < x2 {
                (x1, x2, f1, f2)
            } else {
                (x2, x1, f2, f1)
            };
            return illinois(&mut f, a, b, fa, fb, xtol, ftol);
        }
        if (x2 - x1).abs() <= xtol * x2.abs().max(1.0) {
            return Ok((x2, f2));
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: f1.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root() {
        let (x, _) = illinois(|x| Ok(x * x * x - 2.0), 0.0, 2.0, -2.0, 6.0, 1e-15, 1e-15).unwrap();
        assert!((x - 2f64.cbrt()).abs() < 1e-13);
        let (x, _) = secant(|x| Ok(x.cos() - x), 0.5, 0.6, 1e-15, 1e-16, 50).unwrap();
        assert!((x.cos() - x).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_bracket() {
        assert!(illinois(|x| Ok(x * x + 1.0), -1.0, 1.0, 2.0, 2.0, 1e-12, 1e-12).is_err());
    }
}
