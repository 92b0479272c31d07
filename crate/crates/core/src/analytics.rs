//! Closed-form results for cascaded pseudothermal light: g²(τ) curves,
//! the 2^N zero-lag law, intensity densities, and intensity moments.
//!
//! The stage model is a rectangular spectral density of full width Δω,
//! the unique spectrum whose field correlation is the sinc envelope behind
//! the 1 + sinc² single-stage curve. For more than two rotating stages the
//! product-of-sinc² curve is the natural extrapolation of the two-stage
//! closed form; it is pinned at τ = 0 by the exact 2^N counting law and is
//! verified against the path Monte Carlo rather than proven here.

use crate::bessel::bessel_k0;
use crate::cascade::CascadeSpec;
use crate::curve::G2Curve;
use crate::error::{Error, Result};
use crate::quad::integrate_positive_axis;

/// sinc(x) = sin(x)/x, continuous at 0.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        // series keeps full double precision below the switch point
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Single-stage normalized second-order coherence, 1 + sinc²(Δω τ / 2).
pub fn g2_single(tau: f64, delta_omega: f64) -> Result<f64> {
    if !(delta_omega > 0.0 && delta_omega.is_finite()) {
        return Err(Error::Domain(format!(
            "bandwidth must be positive and finite, got {delta_omega}"
        )));
    }
    if !tau.is_finite() {
        return Err(Error::Domain(format!("lag must be finite, got {tau}")));
    }
    let s = sinc(delta_omega * tau / 2.0);
    Ok(1.0 + s * s)
}

/// Cascade curve: product over rotating stages of [1 + sinc²(Δω_j τ / 2)].
///
/// Static stages contribute a factor of exactly 1; a cascade with no
/// rotating stage returns exactly 1 (coherent light).
pub fn g2_cascade(tau: f64, spec: &CascadeSpec) -> Result<f64> {
    let mut product = 1.0;
    for stage in spec.rotating_stages() {
        product *= g2_single(tau, stage.bandwidth)?;
    }
    Ok(product)
}

/// Zero-lag coherence of N rotating stages: exactly 2^N.
///
/// Bounded at N ≤ 62 so the value stays an exactly representable integer.
pub fn g2_zero(n_rotating: u32) -> Result<f64> {
    if n_rotating > 62 {
        return Err(Error::Range(format!(
            "2^N overflows exact integer range for N = {n_rotating} (max 62)"
        )));
    }
    Ok((1u64 << n_rotating) as f64)
}

/// Negative exponential intensity density of single-stage speckle.
pub fn pdf_exponential(intensity: f64, mean: f64) -> Result<f64> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::Domain(format!("mean intensity must be > 0, got {mean}")));
    }
    if !(intensity >= 0.0) {
        return Err(Error::Domain(format!(
            "intensity must be non-negative, got {intensity}"
        )));
    }
    Ok((-intensity / mean).exp() / mean)
}

/// relative per-evaluation tolerance of the compound-density mixing integral
const COMPOUND_QUAD_TOL: f64 = 1e-7;

/// Intensity density after `n_stages` randomizing stages.
///
/// n = 1 is the negative exponential; n = 2 the closed K₀ form
/// (2/⟨I⟩)·K₀(2√(I/⟨I⟩)); n ≥ 3 has no closed form and is evaluated by
/// recursively mixing the (n−1)-stage density over an exponential
/// distribution of its mean, with adaptive quadrature on a logarithmic
/// axis. The result is normalized to 1 within 1e-6.
///
/// The density diverges at I = 0 for n ≥ 2, so `intensity` must be
/// strictly positive.
pub fn pdf_compound(intensity: f64, mean: f64, n_stages: u32) -> Result<f64> {
    if n_stages < 1 {
        return Err(Error::Domain("stage count must be at least 1".into()));
    }
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::Domain(format!("mean intensity must be > 0, got {mean}")));
    }
    if !(intensity > 0.0) {
        return Err(Error::Domain(format!(
            "intensity must be strictly positive for compound densities, got {intensity}"
        )));
    }
    match n_stages {
        1 => pdf_exponential(intensity, mean),
        2 => Ok(2.0 / mean * bessel_k0(2.0 * (intensity / mean).sqrt())?),
        n => {
            // mix the (n-1)-stage density over an exponentially distributed mean
            let inner_failure: std::cell::Cell<Option<Error>> = std::cell::Cell::new(None);
            let inner = |x: f64| -> f64 {
                if x <= 0.0 {
                    return 0.0;
                }
                match pdf_compound(intensity, x, n - 1) {
                    Ok(d) => d * (-x / mean).exp() / mean,
                    Err(e) => {
                        inner_failure.set(Some(e));
                        0.0
                    }
                }
            };
            // loosen tolerance one decade per extra nesting level
            let rel_tol = COMPOUND_QUAD_TOL * 10f64.powi(n as i32 - 3);
            let scale = mean.max(intensity / 4.0);
            let wrap = |e: Error| {
                Error::Numerical(format!(
                    "compound density quadrature failed at I={intensity:e}, mean={mean:e}, n={n}: {e}"
                ))
            };
            // two passes: a coarse absolute pass sets the magnitude, then a
            // refinement to the relative target (the density spans many
            // decades, so a fixed absolute tolerance would wreck the tail);
            // the floor keeps effectively-zero regions from being refined
            let rough = integrate_positive_axis(&inner, scale, 1e-4 / mean).map_err(wrap)?;
            let tol = (rough.abs() * rel_tol).max(1e-16 / mean);
            let value = integrate_positive_axis(&inner, scale, tol).map_err(wrap)?;
            if let Some(e) = inner_failure.take() {
                return Err(wrap(e));
            }
            Ok(value)
        }
    }
}

/// Exact q-th intensity moment after n stages: ⟨I⟩^q · (q!)^n.
///
/// The factorial power is carried in exact integer arithmetic and
/// converted to float at the end; exceeding 128-bit integer range (or the
/// float range) is a range error.
pub fn moment(q: u32, n_stages: u32, mean: f64) -> Result<f64> {
    if q < 1 {
        return Err(Error::Domain("moment order q must be at least 1".into()));
    }
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::Domain(format!("mean intensity must be > 0, got {mean}")));
    }
    let mut fact: u128 = 1;
    for k in 2..=q as u128 {
        fact = fact
            .checked_mul(k)
            .ok_or_else(|| Error::Range(format!("q! overflows exact arithmetic for q = {q}")))?;
    }
    let mut pow: u128 = 1;
    for _ in 0..n_stages {
        pow = pow.checked_mul(fact).ok_or_else(|| {
            Error::Range(format!("(q!)^n overflows exact arithmetic for q = {q}, n = {n_stages}"))
        })?;
    }
    let value = mean.powi(q as i32) * pow as f64;
    if !value.is_finite() {
        return Err(Error::Range(format!(
            "moment overflows float range for q = {q}, n = {n_stages}, mean = {mean}"
        )));
    }
    Ok(value)
}

/// Table of exact intensity moments ⟨I^q⟩ = ⟨I⟩^q (q!)^n.
#[derive(Debug, Clone)]
pub struct MomentTable {
    pub mean_intensity: f64,
    /// entries[(q, n)] in row-major order of the constructor ranges
    entries: Vec<((u32, u32), f64)>,
}

impl MomentTable {
    /// Build the table for q = 1..=max_q and n = 0..=max_n.
    pub fn build(mean_intensity: f64, max_q: u32, max_n: u32) -> Result<Self> {
        let mut entries = Vec::new();
        for q in 1..=max_q {
            for n in 0..=max_n {
                entries.push(((q, n), moment(q, n, mean_intensity)?));
            }
        }
        Ok(MomentTable {
            mean_intensity,
            entries,
        })
    }

    pub fn get(&self, q: u32, n: u32) -> Option<f64> {
        self.entries
            .iter()
            .find(|((eq, en), _)| *eq == q && *en == n)
            .map(|(_, v)| *v)
    }

    pub fn entries(&self) -> &[((u32, u32), f64)] {
        &self.entries
    }
}

/// Evaluate the analytic cascade curve on a lag grid (zero stderr).
pub fn g2_cascade_curve(spec: &CascadeSpec, lags: &[f64]) -> Result<G2Curve> {
    let values = lags
        .iter()
        .map(|&t| g2_cascade(t, spec))
        .collect::<Result<Vec<_>>>()?;
    G2Curve::exact(lags.to_vec(), values)
}
