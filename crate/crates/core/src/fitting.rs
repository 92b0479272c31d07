//! Nonlinear least squares for measured g²(τ) curves.
//!
//! Fit model: g(τ) = Π_j [1 + β_j sinc²(Δω_j τ / 2)] with one factor for
//! the single-stage model or one per stage for cascades. The amplitudes
//! β_j are free (ideal value 1) so detection imperfections show up as
//! measurably reduced amplitudes instead of a forced ideal shape.
//!
//! The minimizer is a damped (Levenberg-Marquardt) Gauss-Newton iteration
//! with analytic Jacobian, box constraints on the parameters, and five
//! deterministic jittered restarts to escape the sinc side-lobe local
//! minima; the lowest residual wins, ties by start index. Coherence times
//! are reported as τ_c = 2π/Δω, the first zero of the sinc factor.

use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;

use crate::analytics::sinc;
use crate::curve::G2Curve;
use crate::error::{Error, Result};
use crate::rng::{derive_rng, stream};

const MULTISTART: usize = 5;
const MAX_ITERATIONS: usize = 300;
/// fixed internal seed: fitting is a pure function of its inputs
const MULTISTART_SEED: u64 = 0xF17;

/// Which correlation model to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// One sinc² factor.
    Single,
    /// Product of `n` sinc² factors.
    Product(usize),
}

impl FitModel {
    pub fn factors(&self) -> usize {
        match self {
            FitModel::Single => 1,
            FitModel::Product(n) => *n,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "single" {
            return Ok(FitModel::Single);
        }
        if let Some(n) = t.strip_prefix("product-").or_else(|| t.strip_prefix("product")) {
            let n: usize = n
                .parse()
                .map_err(|_| Error::Format(format!("bad fit model '{s}'")))?;
            if n < 1 {
                return Err(Error::Format("product model needs at least one factor".into()));
            }
            return Ok(FitModel::Product(n));
        }
        Err(Error::Format(format!(
            "unknown fit model '{s}' (expected 'single' or 'product-N')"
        )))
    }
}

impl std::fmt::Display for FitModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitModel::Single => write!(f, "single"),
            FitModel::Product(n) => write!(f, "product-{n}"),
        }
    }
}

/// Fitted parameters, uncertainties, and diagnostics.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: FitModel,
    /// Amplitude β_j per factor, ordered by descending bandwidth.
    pub amplitudes: Vec<f64>,
    /// Bandwidth Δω_j per factor (rad/s), descending.
    pub bandwidths: Vec<f64>,
    /// Fitted curve value at τ = 0: exactly Π (1 + β_j).
    pub g2_zero: f64,
    /// Delta-method standard error of `g2_zero`.
    pub g2_zero_stderr: f64,
    /// τ_c,j = 2π/Δω_j per factor.
    pub coherence_times: Vec<f64>,
    /// Parameter covariance, packed as [β₁, Δω₁, β₂, Δω₂, ...].
    pub covariance: Vec<Vec<f64>>,
    /// Unweighted root-mean-square of the residuals.
    pub residual_rms: f64,
    pub iterations: usize,
}

impl FitResult {
    /// Evaluate the fitted model on a lag grid.
    pub fn curve(&self, lags: &[f64]) -> Result<G2Curve> {
        let params = pack(&self.amplitudes, &self.bandwidths);
        let values: Vec<f64> = lags.iter().map(|&t| model_value(&params, t)).collect();
        G2Curve::exact(lags.to_vec(), values)
    }

    /// Standard error of one packed parameter.
    pub fn param_stderr(&self, index: usize) -> f64 {
        self.covariance[index][index].max(0.0).sqrt()
    }

    /// Structured text export (`key: value` lines).
    pub fn write_text<W: Write>(&self, w: &mut W, header_comment: Option<&str>) -> Result<()> {
        if let Some(c) = header_comment {
            for line in c.lines() {
                writeln!(w, "# {line}")?;
            }
        }
        writeln!(w, "model: {}", self.model)?;
        writeln!(w, "g2_zero: {:.16e}", self.g2_zero)?;
        writeln!(w, "g2_zero_stderr: {:.16e}", self.g2_zero_stderr)?;
        for j in 0..self.amplitudes.len() {
            writeln!(w, "amplitude_{}: {:.16e}", j + 1, self.amplitudes[j])?;
            writeln!(
                w,
                "amplitude_{}_stderr: {:.16e}",
                j + 1,
                self.param_stderr(2 * j)
            )?;
            writeln!(w, "bandwidth_rad_s_{}: {:.16e}", j + 1, self.bandwidths[j])?;
            writeln!(
                w,
                "bandwidth_rad_s_{}_stderr: {:.16e}",
                j + 1,
                self.param_stderr(2 * j + 1)
            )?;
            writeln!(
                w,
                "coherence_time_s_{}: {:.16e}",
                j + 1,
                self.coherence_times[j]
            )?;
        }
        writeln!(w, "residual_rms: {:.16e}", self.residual_rms)?;
        writeln!(w, "iterations: {}", self.iterations)?;
        Ok(())
    }

    pub fn save_text(&self, path: &Path, header_comment: Option<&str>) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        self.write_text(&mut w, header_comment)
    }

    /// Residual export: `lag_s,data,model,residual` CSV.
    pub fn write_residuals_csv<W: Write>(
        &self,
        curve: &G2Curve,
        w: &mut W,
        header_comment: Option<&str>,
    ) -> Result<()> {
        if let Some(c) = header_comment {
            for line in c.lines() {
                writeln!(w, "# {line}")?;
            }
        }
        writeln!(w, "lag_s,data,model,residual")?;
        let params = pack(&self.amplitudes, &self.bandwidths);
        for (&lag, &y) in curve.lags().iter().zip(curve.values()) {
            let m = model_value(&params, lag);
            writeln!(w, "{lag:.16e},{y:.16e},{m:.16e},{:.16e}", y - m)?;
        }
        Ok(())
    }
}

// parameters are packed [β₁, Δω₁, β₂, Δω₂, ...]
fn pack(amplitudes: &[f64], bandwidths: &[f64]) -> Vec<f64> {
    amplitudes
        .iter()
        .zip(bandwidths)
        .flat_map(|(&b, &w)| [b, w])
        .collect()
}

fn model_value(params: &[f64], tau: f64) -> f64 {
    let mut g = 1.0;
    for pair in params.chunks_exact(2) {
        let s = sinc(pair[1] * tau / 2.0);
        g *= 1.0 + pair[0] * s * s;
    }
    g
}

/// d sinc(x) / dx, continuous at 0.
fn dsinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        -x / 3.0 + x * x * x / 30.0
    } else {
        (x.cos() - x.sin() / x) / x
    }
}

/// value and per-parameter gradient of the model at one lag
fn model_value_grad(params: &[f64], tau: f64, grad: &mut [f64]) -> f64 {
    let nf = params.len() / 2;
    let mut factors = Vec::with_capacity(nf);
    for pair in params.chunks_exact(2) {
        let x = pair[1] * tau / 2.0;
        let s = sinc(x);
        factors.push((1.0 + pair[0] * s * s, s, x));
    }
    let g: f64 = factors.iter().map(|f| f.0).product();
    for j in 0..nf {
        let (fj, s, x) = factors[j];
        let others: f64 = if fj != 0.0 {
            g / fj
        } else {
            factors
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, f)| f.0)
                .product()
        };
        grad[2 * j] = s * s * others;
        // d(s²)/dΔω = 2 s s'(x) · τ/2
        grad[2 * j + 1] = params[2 * j] * 2.0 * s * dsinc(x) * (tau / 2.0) * others;
    }
    g
}

/// Solve (A + λ diag(A)) x = b for small symmetric positive definite A.
fn solve_damped(a: &[Vec<f64>], b: &[f64], lambda: f64) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = a[i][j];
        }
        m[i][i] += lambda * a[i][i].max(1e-300);
    }
    // Cholesky
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // forward/back substitution
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Some(x)
}

fn invert_spd(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv = vec![vec![0.0; n]; n];
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let x = solve_damped(a, &e, 0.0)?;
        for row in 0..n {
            inv[row][col] = x[row];
        }
    }
    Some(inv)
}

struct Minimized {
    params: Vec<f64>,
    sse: f64,
    iterations: usize,
    converged: bool,
}

impl Minimized {
    fn converged(params: Vec<f64>, sse: f64, iterations: usize) -> Self {
        Minimized {
            params,
            sse,
            iterations,
            converged: true,
        }
    }
}

struct Problem<'a> {
    lags: &'a [f64],
    values: &'a [f64],
    weights: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Problem<'_> {
    fn weighted_sse(&self, params: &[f64]) -> f64 {
        self.lags
            .iter()
            .zip(self.values)
            .zip(&self.weights)
            .map(|((&t, &y), &w)| {
                let r = (model_value(params, t) - y) * w;
                r * r
            })
            .sum()
    }

    fn clamp(&self, params: &mut [f64]) {
        for i in 0..params.len() {
            params[i] = params[i].clamp(self.lo[i], self.hi[i]);
        }
    }

    /// One damped least-squares run from a start point. `converged` is
    /// false only when the iteration budget ran out while steps were
    /// still improving.
    fn minimize(&self, start: &[f64]) -> Minimized {
        let p = start.len();
        let mut params = start.to_vec();
        self.clamp(&mut params);
        let mut sse = self.weighted_sse(&params);
        let mut lambda = 1e-3;
        let mut grad_buf = vec![0.0; p];
        let mut iterations = 0;
        for _ in 0..MAX_ITERATIONS {
            iterations += 1;
            // normal equations
            let mut jtj = vec![vec![0.0; p]; p];
            let mut jtr = vec![0.0; p];
            for ((&t, &y), &w) in self.lags.iter().zip(self.values).zip(&self.weights) {
                let m = model_value_grad(&params, t, &mut grad_buf);
                let r = (m - y) * w;
                for i in 0..p {
                    let ji = grad_buf[i] * w;
                    jtr[i] += ji * r;
                    for j in 0..=i {
                        jtj[i][j] += ji * grad_buf[j] * w;
                    }
                }
            }
            for i in 0..p {
                for j in i + 1..p {
                    jtj[i][j] = jtj[j][i];
                }
            }
            let mut improved = false;
            for _ in 0..40 {
                let neg = jtr.iter().map(|v| -v).collect::<Vec<_>>();
                if let Some(step) = solve_damped(&jtj, &neg, lambda) {
                    let mut trial: Vec<f64> =
                        params.iter().zip(&step).map(|(p, s)| p + s).collect();
                    self.clamp(&mut trial);
                    let trial_sse = self.weighted_sse(&trial);
                    if trial_sse.is_finite() && trial_sse < sse {
                        let gain = sse - trial_sse;
                        params = trial;
                        sse = trial_sse;
                        lambda = (lambda / 3.0).max(1e-14);
                        improved = true;
                        if gain <= 1e-14 * sse.max(1e-300) {
                            return Minimized::converged(params, sse, iterations);
                        }
                        break;
                    }
                }
                lambda *= 10.0;
                if lambda > 1e13 {
                    return Minimized::converged(params, sse, iterations);
                }
            }
            if !improved {
                // no improving step exists at any damping: local optimum
                return Minimized::converged(params, sse, iterations);
            }
        }
        Minimized {
            params,
            sse,
            iterations,
            converged: false,
        }
    }
}

/// First local minimum of the curve at positive lag, for the bandwidth guess.
fn first_minimum_lag(curve: &G2Curve) -> Option<f64> {
    let lags = curve.lags();
    let values = curve.values();
    let start = lags.iter().position(|&l| l > 0.0)?;
    for i in (start.max(1))..lags.len() - 1 {
        if lags[i] > 0.0 && values[i] <= values[i - 1] && values[i] < values[i + 1] {
            return Some(lags[i]);
        }
    }
    None
}

/// Fit a g² curve to the chosen model.
///
/// Points are weighted by 1/stderr when every point carries a positive
/// error, unweighted otherwise. `initial_guess`, when given, is the
/// packed parameter vector [β₁, Δω₁, ...] and replaces the self-generated
/// start (jittered restarts still apply).
pub fn fit_g2(curve: &G2Curve, model: FitModel, initial_guess: Option<&[f64]>) -> Result<FitResult> {
    let nf = model.factors();
    let p = 2 * nf;
    if curve.len() < 10.max(p + 1) {
        return Err(Error::Contract(format!(
            "need at least {} points to fit {model}, got {}",
            10.max(p + 1),
            curve.len()
        )));
    }
    if let Some(g) = initial_guess {
        if g.len() != p {
            return Err(Error::Contract(format!(
                "initial guess must pack {p} parameters for {model}, got {}",
                g.len()
            )));
        }
    }
    let values = curve.values();
    let peak = values.iter().cloned().fold(f64::MIN, f64::max);
    let floor = values.iter().cloned().fold(f64::MAX, f64::min);
    if !(peak - floor > 1e-9 * peak.abs().max(1.0)) {
        return Err(Error::Fit {
            message: "no structure: curve is constant".into(),
            best_residual_rms: None,
            best_params: None,
        });
    }
    let excess = peak - 1.0;
    if !(excess > 0.0) {
        return Err(Error::Fit {
            message: "no structure: curve never rises above the baseline".into(),
            best_residual_rms: None,
            best_params: None,
        });
    }

    let weights: Vec<f64> = if curve.stderr().iter().all(|&s| s > 0.0) {
        curve.stderr().iter().map(|&s| 1.0 / s).collect()
    } else {
        vec![1.0; curve.len()]
    };

    // parameter box from the lag grid geometry
    let tau_span = curve
        .lags()
        .iter()
        .map(|l| l.abs())
        .fold(f64::MIN, f64::max);
    let tau_step = curve
        .lags()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::MAX, f64::min);
    let circle = 2.0 * std::f64::consts::PI;
    let w_lo = circle / (200.0 * tau_span);
    let w_hi = circle / (2.0 * tau_step);
    let mut lo = Vec::with_capacity(p);
    let mut hi = Vec::with_capacity(p);
    for _ in 0..nf {
        lo.extend_from_slice(&[1e-6, w_lo]);
        hi.extend_from_slice(&[20.0, w_hi]);
    }
    let problem = Problem {
        lags: curve.lags(),
        values,
        weights,
        lo,
        hi,
    };

    // base start: peak height sets β, first local minimum sets Δω
    let beta0 = (peak.max(1.0 + 1e-6).powf(1.0 / nf as f64) - 1.0).clamp(1e-3, 19.0);
    let w0 = first_minimum_lag(curve)
        .map(|t| circle / t)
        .unwrap_or(circle / (0.5 * tau_span))
        .clamp(w_lo, w_hi);
    let base: Vec<f64> = match initial_guess {
        Some(g) => g.to_vec(),
        None => {
            let mut b = Vec::with_capacity(p);
            for j in 0..nf {
                // spread multi-factor starts over a bandwidth ladder
                b.extend_from_slice(&[beta0, w0 / 2f64.powi(j as i32)]);
            }
            b
        }
    };

    let mut rng = derive_rng(MULTISTART_SEED, stream::FIT_MULTISTART, 0);
    let mut best: Option<Minimized> = None;
    for start_idx in 0..MULTISTART {
        let mut start = base.clone();
        if start_idx > 0 {
            for (i, v) in start.iter_mut().enumerate() {
                let spread = if i % 2 == 0 { 0.7 } else { 1.4 };
                *v *= rng.random_range::<f64, _>(-spread..spread).exp();
            }
        }
        let run = problem.minimize(&start);
        let better = match &best {
            None => true,
            Some(b) => run.sse < b.sse, // ties keep the earlier start
        };
        if better {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start always runs");
    if !best.sse.is_finite() {
        return Err(Error::Fit {
            message: "optimizer diverged".into(),
            best_residual_rms: None,
            best_params: Some(best.params),
        });
    }
    if !best.converged {
        let m = curve.len() as f64;
        return Err(Error::Fit {
            message: format!(
                "no convergence within {MAX_ITERATIONS} iterations"
            ),
            best_residual_rms: Some((best.sse / m).sqrt()),
            best_params: Some(best.params),
        });
    }
    let Minimized {
        mut params,
        sse,
        iterations,
        ..
    } = best;

    // canonical factor order: descending bandwidth
    let mut order: Vec<usize> = (0..nf).collect();
    order.sort_by(|&a, &b| params[2 * b + 1].partial_cmp(&params[2 * a + 1]).unwrap());
    let reordered: Vec<f64> = order
        .iter()
        .flat_map(|&j| [params[2 * j], params[2 * j + 1]])
        .collect();
    params = reordered;

    // covariance from the Jacobian at the optimum
    let mut jtj = vec![vec![0.0; p]; p];
    let mut grad_buf = vec![0.0; p];
    let m = curve.len();
    for ((&t, _), &w) in curve.lags().iter().zip(values).zip(&problem.weights) {
        model_value_grad(&params, t, &mut grad_buf);
        for i in 0..p {
            for j in 0..=i {
                jtj[i][j] += grad_buf[i] * grad_buf[j] * w * w;
            }
        }
    }
    for i in 0..p {
        for j in i + 1..p {
            jtj[i][j] = jtj[j][i];
        }
    }
    let weighted = curve.stderr().iter().all(|&s| s > 0.0);
    let dof = (m.saturating_sub(p)).max(1) as f64;
    let scale = if weighted { 1.0 } else { sse / dof };
    let covariance = match invert_spd(&jtj) {
        Some(mut inv) => {
            for row in inv.iter_mut() {
                for v in row.iter_mut() {
                    *v *= scale;
                }
            }
            inv
        }
        None => vec![vec![f64::NAN; p]; p],
    };

    let amplitudes: Vec<f64> = (0..nf).map(|j| params[2 * j]).collect();
    let bandwidths: Vec<f64> = (0..nf).map(|j| params[2 * j + 1]).collect();
    let g2_zero: f64 = amplitudes.iter().map(|b| 1.0 + b).product();
    // delta method over the amplitude components
    let mut var = 0.0;
    for i in 0..nf {
        for j in 0..nf {
            let gi: f64 = amplitudes
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, b)| 1.0 + b)
                .product();
            let gj: f64 = amplitudes
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, b)| 1.0 + b)
                .product();
            let c = covariance[2 * i][2 * j];
            if c.is_finite() {
                var += gi * gj * c;
            }
        }
    }
    let residual_rms = {
        let sq: f64 = curve
            .lags()
            .iter()
            .zip(values)
            .map(|(&t, &y)| (model_value(&params, t) - y).powi(2))
            .sum();
        (sq / m as f64).sqrt()
    };
    Ok(FitResult {
        model,
        coherence_times: bandwidths.iter().map(|w| circle / w).collect(),
        amplitudes,
        bandwidths,
        g2_zero,
        g2_zero_stderr: var.max(0.0).sqrt(),
        covariance,
        residual_rms,
        iterations,
    })
}

/// Comparison of a cascade curve against the product of its single-stage
/// curves, mirroring the product-line consistency check.
#[derive(Debug, Clone)]
pub struct ProductCheckReport {
    /// Lags where all three curves overlap.
    pub lags: Vec<f64>,
    /// Pointwise product of the two single-stage curves.
    pub product: Vec<f64>,
    /// The cascade curve restricted to the shared lags.
    pub reference: Vec<f64>,
    /// reference − product, per point.
    pub residuals: Vec<f64>,
    /// Root-mean-square of the residuals.
    pub rms_gap: f64,
    /// Pooled per-point standard error of the gap (product errors
    /// propagated and combined with the reference errors).
    pub pooled_stderr: f64,
}

impl ProductCheckReport {
    pub fn write_text<W: Write>(&self, w: &mut W, header_comment: Option<&str>) -> Result<()> {
        if let Some(c) = header_comment {
            for line in c.lines() {
                writeln!(w, "# {line}")?;
            }
        }
        writeln!(w, "points: {}", self.lags.len())?;
        writeln!(w, "rms_gap: {:.16e}", self.rms_gap)?;
        writeln!(w, "pooled_stderr: {:.16e}", self.pooled_stderr)?;
        writeln!(w, "lag_s,product,reference,residual")?;
        for i in 0..self.lags.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.lags[i], self.product[i], self.reference[i], self.residuals[i]
            )?;
        }
        Ok(())
    }
}

/// Pointwise product of two single-stage curves against a cascade curve.
///
/// Curves are aligned on `curve_ab`'s lag grid (linear interpolation where
/// grids differ; exact on shared grids). Errors if the grids share no
/// overlap.
pub fn product_curve_check(
    curve_a: &G2Curve,
    curve_b: &G2Curve,
    curve_ab: &G2Curve,
) -> Result<ProductCheckReport> {
    let lo = curve_a.lags()[0].max(curve_b.lags()[0]);
    let hi = curve_a.lags().last().unwrap().min(*curve_b.lags().last().unwrap());
    let mut lags = Vec::new();
    let mut product = Vec::new();
    let mut reference = Vec::new();
    let mut residuals = Vec::new();
    let mut pooled_sq = 0.0;
    for (i, &lag) in curve_ab.lags().iter().enumerate() {
        if lag < lo || lag > hi {
            continue;
        }
        let a = curve_a.value_at(lag)?;
        let b = curve_b.value_at(lag)?;
        let prod = a * b;
        let r = curve_ab.values()[i];
        lags.push(lag);
        product.push(prod);
        reference.push(r);
        residuals.push(r - prod);
        // nearest-point error transfer is enough for pooling purposes
        let sa = nearest_stderr(curve_a, lag);
        let sb = nearest_stderr(curve_b, lag);
        let sab = curve_ab.stderr()[i];
        pooled_sq += sab * sab + (b * sa) * (b * sa) + (a * sb) * (a * sb);
    }
    if lags.is_empty() {
        return Err(Error::Contract(
            "curves share no overlapping lag range".into(),
        ));
    }
    let n = lags.len() as f64;
    let rms_gap = (residuals.iter().map(|r| r * r).sum::<f64>() / n).sqrt();
    Ok(ProductCheckReport {
        lags,
        product,
        reference,
        residuals,
        rms_gap,
        pooled_stderr: (pooled_sq / n).sqrt(),
    })
}

fn nearest_stderr(curve: &G2Curve, lag: f64) -> f64 {
    let lags = curve.lags();
    let idx = match lags.binary_search_by(|l| l.partial_cmp(&lag).unwrap()) {
        Ok(i) => i,
        Err(i) => {
            if i == 0 {
                0
            } else if i >= lags.len() {
                lags.len() - 1
            } else if (lags[i] - lag).abs() < (lag - lags[i - 1]).abs() {
                i
            } else {
                i - 1
            }
        }
    };
    curve.stderr()[idx]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::g2_cascade_curve;
    use crate::cascade::CascadeSpec;
    use crate::curve::symmetric_lag_grid;

    fn exact_curve(amplitudes: &[f64], bandwidths: &[f64], max_lag: f64, n: usize) -> G2Curve {
        let lags = symmetric_lag_grid(max_lag, n).unwrap();
        let params = pack(amplitudes, bandwidths);
        let values = lags.iter().map(|&t| model_value(&params, t)).collect();
        G2Curve::exact(lags, values).unwrap()
    }

    #[test]
    fn noiseless_single_round_trip() {
        let tc = 2.0 * std::f64::consts::PI / 3.0e6;
        let curve = exact_curve(&[1.0], &[3.0e6], 4.0 * tc, 81);
        let fit = fit_g2(&curve, FitModel::Single, None).unwrap();
        assert!((fit.amplitudes[0] - 1.0).abs() < 1e-6, "{:?}", fit.amplitudes);
        assert!((fit.bandwidths[0] / 3.0e6 - 1.0).abs() < 1e-6);
        assert!((fit.g2_zero - 2.0).abs() < 1e-6);
        assert!(fit.residual_rms < 1e-9);
        assert!((fit.coherence_times[0] - tc).abs() / tc < 1e-6);
    }

    #[test]
    fn noiseless_product_round_trip_with_separated_scales() {
        let w1 = 5.0e6;
        let w2 = 1.0e6;
        let tc2 = 2.0 * std::f64::consts::PI / w2;
        let curve = exact_curve(&[1.0, 1.0], &[w1, w2], 3.0 * tc2, 161);
        let fit = fit_g2(&curve, FitModel::Product(2), None).unwrap();
        assert!((fit.bandwidths[0] / w1 - 1.0).abs() < 1e-4, "{:?}", fit.bandwidths);
        assert!((fit.bandwidths[1] / w2 - 1.0).abs() < 1e-4);
        assert!((fit.g2_zero - 4.0).abs() < 1e-4);
    }

    #[test]
    fn reported_zero_matches_model_evaluation() {
        let curve = exact_curve(&[0.8, 0.6], &[4.0e6, 1.3e6], 2.0e-5, 121);
        let fit = fit_g2(&curve, FitModel::Product(2), None).unwrap();
        let at_zero = fit.curve(&[0.0]).unwrap().values()[0];
        assert!((fit.g2_zero - at_zero).abs() < 1e-9 * at_zero);
    }

    #[test]
    fn scale_consistency_under_lag_rescaling() {
        let curve = exact_curve(&[0.9], &[2.0e6], 1.0e-5, 61);
        let fit = fit_g2(&curve, FitModel::Single, None).unwrap();
        let s = 1.0e6; // work in microseconds instead of seconds
        let scaled = G2Curve::exact(
            curve.lags().iter().map(|l| l * s).collect(),
            curve.values().to_vec(),
        )
        .unwrap();
        let fit_scaled = fit_g2(&scaled, FitModel::Single, None).unwrap();
        assert!((fit_scaled.amplitudes[0] / fit.amplitudes[0] - 1.0).abs() < 1e-6);
        assert!((fit_scaled.bandwidths[0] * s / fit.bandwidths[0] - 1.0).abs() < 1e-6);
        assert!((fit_scaled.residual_rms - fit.residual_rms).abs() < 1e-9);
    }

    #[test]
    fn flat_noise_gives_amplitude_consistent_with_zero() {
        let mut rng = derive_rng(77, stream::FIT_MULTISTART, 9);
        let lags = symmetric_lag_grid(1.0e-5, 101).unwrap();
        let sigma = 0.01;
        let values: Vec<f64> = lags
            .iter()
            .map(|_| 1.0 + sigma * (rng.random::<f64>() - 0.5) * 3.46)
            .collect();
        let curve = G2Curve::new(lags, values, vec![sigma; 101]).unwrap();
        let fit = fit_g2(&curve, FitModel::Single, None).unwrap();
        let se = fit.param_stderr(0).max(1e-6);
        assert!(
            fit.amplitudes[0] < 3.0 * se,
            "spurious amplitude {} +- {se}",
            fit.amplitudes[0]
        );
    }

    #[test]
    fn constant_curve_is_a_fit_error() {
        let lags = symmetric_lag_grid(1.0, 21).unwrap();
        let curve = G2Curve::exact(lags, vec![1.0; 21]).unwrap();
        match fit_g2(&curve, FitModel::Single, None) {
            Err(Error::Fit { message, .. }) => assert!(message.contains("no structure")),
            other => panic!("expected fit error, got {other:?}"),
        }
    }

    #[test]
    fn too_few_points_is_a_contract_violation() {
        let curve = exact_curve(&[1.0], &[1.0e6], 1.0e-5, 5);
        assert!(matches!(
            fit_g2(&curve, FitModel::Single, None),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn model_parsing() {
        assert_eq!(FitModel::parse("single").unwrap(), FitModel::Single);
        assert_eq!(FitModel::parse("product-2").unwrap(), FitModel::Product(2));
        assert_eq!(FitModel::parse("Product-3").unwrap(), FitModel::Product(3));
        assert!(FitModel::parse("gaussian").is_err());
        assert!(FitModel::parse("product-0").is_err());
    }

    #[test]
    fn product_check_is_exactly_zero_on_analytic_inputs() {
        use crate::cascade::SpectralStage;
        let w1 = 2.922e6;
        let w2 = 5.818e6;
        let lags = symmetric_lag_grid(1.0e-5, 201).unwrap();
        let only_1 = CascadeSpec::new(
            vec![SpectralStage::rotating(w1), SpectralStage::fixed()],
            0.0,
        )
        .unwrap();
        let only_2 = CascadeSpec::new(
            vec![SpectralStage::fixed(), SpectralStage::rotating(w2)],
            0.0,
        )
        .unwrap();
        let both = CascadeSpec::all_rotating(&[w1, w2]).unwrap();
        let a = g2_cascade_curve(&only_1, &lags).unwrap();
        let b = g2_cascade_curve(&only_2, &lags).unwrap();
        let ab = g2_cascade_curve(&both, &lags).unwrap();
        let report = product_curve_check(&a, &b, &ab).unwrap();
        assert_eq!(report.rms_gap, 0.0);
        assert!(report.residuals.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn product_check_flags_narrowed_reference() {
        let w = 2.0e6;
        let lags = symmetric_lag_grid(1.0e-5, 101).unwrap();
        let a = exact_curve(&[1.0], &[w], 1.0e-5, 101);
        let b = exact_curve(&[1.0], &[w / 3.0], 1.0e-5, 101);
        // narrowed two-stage curve: both bandwidths inflated by 20%
        let narrowed = G2Curve::exact(
            lags.clone(),
            lags.iter()
                .map(|&t| model_value(&pack(&[1.0, 1.0], &[1.2 * w, 0.4 * w]), t))
                .collect(),
        )
        .unwrap();
        let report = product_curve_check(&a, &b, &narrowed).unwrap();
        assert!(report.rms_gap > 0.01, "gap {}", report.rms_gap);
        // the narrowed curve sits below the product through the wings and
        // meets it at zero lag: residuals are one-sided
        let at_zero = report
            .lags
            .iter()
            .position(|&l| l == 0.0)
            .map(|i| report.residuals[i])
            .unwrap();
        assert!(at_zero.abs() < 1e-12, "residual at zero lag {at_zero}");
        let negative = report.residuals.iter().filter(|&&r| r < 0.0).count();
        assert!(
            negative > report.residuals.len() / 2,
            "expected a predominantly negative residual pattern, got {negative}/{}",
            report.residuals.len()
        );
    }

    #[test]
    fn product_check_rejects_disjoint_ranges() {
        let a = G2Curve::exact(vec![0.0, 1.0], vec![2.0, 1.0]).unwrap();
        let b = G2Curve::exact(vec![0.0, 1.0], vec![2.0, 1.0]).unwrap();
        let ab = G2Curve::exact(vec![5.0, 6.0], vec![4.0, 1.0]).unwrap();
        assert!(matches!(
            product_curve_check(&a, &b, &ab),
            Err(Error::Contract(_))
        ));
    }
}
