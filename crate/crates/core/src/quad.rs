//! Adaptive quadrature used by the compound-density evaluation and by
//! test oracles.
//!
//! Two entry points: `adaptive_simpson` on a finite interval, and
//! `integrate_positive_axis` for ∫₀^∞ f(I) dI of densities with a possible
//! logarithmic singularity at the origin and an exponential-type tail.
//! The half-line integral substitutes I = e^u, which turns the singular
//! endpoint into a rapidly decaying tail on a finite log window.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// width of the log-axis window on each side of ln(scale)
const LOG_WINDOW: f64 = 42.0;

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !flm.is_finite() || !frm.is_finite() {
        return Err(Error::Numerical(format!(
            "integrand not finite near x = {lm:e} / {rm:e}"
        )));
    }
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    // below this width the integrand is only jitter (e.g. an inner
    // quadrature's own tolerance); accept the extrapolated value
    let width_floor = 2f64.powi(-40) * (a.abs() + b.abs() + 1.0);
    if delta.abs() <= 15.0 * tol || (b - a) <= width_floor {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Numerical(format!(
            "quadrature did not converge on [{a:e}, {b:e}] (residual {delta:e}, tol {tol:e})"
        )));
    }
    let l = adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1)?;
    let r = adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1)?;
    Ok(l + r)
}

/// Adaptive Simpson integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Domain(format!("invalid interval [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    if !fa.is_finite() || !fb.is_finite() || !fm.is_finite() {
        return Err(Error::Numerical(
            "integrand not finite at an interval endpoint or midpoint".into(),
        ));
    }
    // seed the recursion on a few panels so narrow features are not missed
    let panels = 8;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let pa = a + i as f64 * h;
        let pb = pa + h;
        let pm = 0.5 * (pa + pb);
        let (fpa, fpm, fpb) = (f(pa), f(pm), f(pb));
        let whole = simpson(fpa, fpm, fpb, h);
        total += adapt(&f, pa, pb, fpa, fpm, fpb, whole, tol / panels as f64, 0)?;
    }
    Ok(total)
}

/// ∫₀^∞ f(I) dI for a non-negative-axis integrand with characteristic
/// scale `scale` (e.g. the mean of a density).
///
/// Valid for integrands that decay at least exponentially in I^(1/k) for
/// moderate k and grow at most polynomially in |ln I| near 0; both hold
/// for every compound intensity density and its low-order moments.
pub fn integrate_positive_axis<F: Fn(f64) -> f64>(f: F, scale: f64, tol: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::Domain(format!("scale must be positive, got {scale}")));
    }
    let ln_s = scale.ln();
    let g = |u: f64| {
        let x = u.exp();
        let v = f(x) * x;
        if v.is_finite() {
            v
        } else {
            0.0 // underflow products (0 * huge) are genuine zeros here
        }
    };
    adaptive_simpson(g, ln_s - LOG_WINDOW, ln_s + LOG_WINDOW, tol)
}
