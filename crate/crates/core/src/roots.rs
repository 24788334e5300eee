//! Bracketed scalar root finding.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAX_ITERATIONS: usize = 200;

/// Brent's method: inverse quadratic / secant steps with a bisection
/// fallback, on a bracket `[a, b]` where `f` changes sign.
///
/// `f` may fail (e.g. a singular solve); the error is propagated.
pub fn brent<T: Real, F>(mut f: F, a: T, b: T, xtol: T) -> Result<T>
where
    F: FnMut(T) -> Result<T>,
{
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa.is_zero() {
        return Ok(a);
    }
    if fb.is_zero() {
        return Ok(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return Err(Error::NoSignChange);
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..MAX_ITERATIONS {
        if (fb > T::zero()) == (fc > T::zero()) {
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
        let tol = two * T::machine_epsilon() * b.abs() + half * xtol;
        let m = half * (c - b);
        if m.abs() <= tol || fb.is_zero() {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (two * m * s, T::one() - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (two * m * q * (q - r) - (b - a) * (r - T::one())),
                    (q - T::one()) * (r - T::one()) * (s - T::one()),
                )
            };
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            let bound = (T::lit(3.0) * m * q - (tol * q).abs()).min((e * q).abs());
            if two * p < bound {
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
        b += if d.abs() > tol {
            d
        } else if m > T::zero() {
            tol
        } else {
            -tol
        };
        fb = f(b)?;
    }
    Err(Error::RootNotConverged)
}
