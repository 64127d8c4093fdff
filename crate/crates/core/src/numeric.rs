//! Small numerical kernels shared by the solvers: guarded inverse hyperbolic
//! functions, bracketed bisection and a golden-section minimiser.

use crate::error::{BellError, Result};

/// Inverse hyperbolic sine, stable for tiny and huge arguments.
pub fn arsinh(x: f64) -> f64 {
    let a = x.abs();
    let r = if a > 1e8 {
        // ln(2a) + 1/(4a²); the correction vanishes below f64 resolution soon after.
        (2.0 * a).ln() + 0.25 / (a * a)
    } else {
        let s = (1.0 + a * a).sqrt();
        (a + a * a / (1.0 + s)).ln_1p()
    };
    r.copysign(x)
}

/// Inverse hyperbolic tangent on (-1, 1), evaluated as ½ln((1+x)/(1−x)).
pub fn artanh(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return f64::INFINITY.copysign(x);
    }
    0.5 * (2.0 * x / (1.0 - x)).ln_1p()
}

/// Bisection on a bracket `[lo, hi]` with `f(lo)` and `f(hi)` of opposite sign.
///
/// Terminates when the bracket width drops below `rel_tol * max(|lo|, |hi|)`
/// (or an absolute floor of `rel_tol * 1e-300`) or the midpoint hits an exact zero.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(BellError::Convergence(format!(
            "root not bracketed on [{lo:e}, {hi:e}]: f(lo)={f_lo:e}, f(hi)={f_hi:e}"
        )));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        let width = hi - lo;
        if width.abs() <= rel_tol * lo.abs().max(hi.abs()) || mid == lo || mid == hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection that first grows `hi` by doubling until `f` changes sign.
pub fn bisect_expanding<F>(mut f: F, lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let f_lo = f(lo);
    let mut f_hi = f(hi);
    let mut doublings = 0;
    while f_lo.signum() == f_hi.signum() && f_hi != 0.0 {
        if doublings > 1100 || !hi.is_finite() {
            return Err(BellError::Convergence(format!(
                "bracket expansion from [{lo:e}, ..] failed after {doublings} doublings, last f={f_hi:e}"
            )));
        }
        hi *= 2.0;
        f_hi = f(hi);
        doublings += 1;
    }
    bisect(f, lo, hi, rel_tol)
}

/// Golden-section minimisation of a unimodal `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `tol`. Returns `(x_min, f(x_min))`;
/// on ties the smaller abscissa wins.
pub fn golden_section<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (hi - lo).abs() > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Logarithmically spaced grid with `per_decade` points per decade, both ends included.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).round() as usize;
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..=n)
        .map(|i| (llo + (lhi - llo) * i as f64 / n as f64).exp())
        .collect()
}
