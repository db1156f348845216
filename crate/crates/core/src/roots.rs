//! Bracketed scalar root finding and 1-D extremum refinement.

use crate::error::Result;
use crate::torus::TorusPoint;

/// A root bracketed to `|hi - lo| < tol`.
#[derive(Debug, Clone, Copy)]
pub struct Bracketed {
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Brent's method on `[a, b]` with `f(a)`, `f(b)` of opposite sign.
///
/// Keeps a sign-changing bracket at every step and stops once its width
/// drops below `tol` (or an exact zero is hit). Errors from `f` propagate.
pub fn brent<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, tol: f64) -> Result<Bracketed>
where
    F: FnMut(f64) -> Result<f64>,
{
    debug_assert!(fa.signum() != fb.signum() || fa == 0.0 || fb == 0.0);
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb.signum() == fc.signum() && fb != 0.0 {
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
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.25 * tol;
        let xm = 0.5 * (c - b);
        if fb == 0.0 || (c - b).abs() < tol || xm.abs() <= tol1 {
            let (lo, hi) = if b < c { (b, c) } else { (c, b) };
            return Ok(Bracketed { root: b, lo, hi });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic interpolation, or secant when a == c
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
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
    let (lo, hi) = if b < c { (b, c) } else { (c, b) };
    Ok(Bracketed { root: b, lo, hi })
}

/// Plain bisection on the sign of `f`; `f(a)` and `f(b)` must differ in sign.
pub fn bisect<F>(mut f: F, a: f64, b: f64, fa: f64, tol: f64) -> Result<Bracketed>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi, mut flo) = (a.min(b), a.max(b), if a <= b { fa } else { f64::NAN });
    if flo.is_nan() {
        flo = f(lo)?;
    }
    for _ in 0..200 {
        if hi - lo < tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(Bracketed { root: mid, lo: mid, hi: mid });
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(Bracketed {
        root: 0.5 * (lo + hi),
        lo,
        hi,
    })
}

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
/// Returns `(x, f(x))`.
pub fn golden_max<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a, b);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Coordinate-wise golden-section polish of a sampled extremum of `f` on
/// the torus within `±h` per axis. `sign` is `1` for a maximum and `-1` for
/// a minimum. Never returns a worse value than the starting sample.
pub fn polish_on_torus<F>(start: TorusPoint, value: f64, sign: f64, h: f64, f: F) -> Result<(TorusPoint, f64)>
where
    F: Fn(&TorusPoint) -> Result<f64>,
{
    let d = start.dim().get();
    let mut best = (start, value);
    for _pass in 0..d {
        for ax in 0..d {
            let base = best.0;
            let moved = |t: f64| {
                let mut c = [0.0; 2];
                c[..d].copy_from_slice(base.coords());
                c[ax] = t;
                TorusPoint::wrap(&c[..d])
            };
            let c0 = base.coords()[ax];
            let (t, v) = golden_max(|t| Ok(sign * f(&moved(t)?)?), c0 - h, c0 + h, 1e-9)?;
            if sign * v > sign * best.1 {
                best = (moved(t)?, sign * v);
            }
        }
    }
    Ok(best)
}
