//! Classical stochastic route: synthesized stage fields, cascaded
//! intensity traces, direct correlation, compound intensity sampling,
//! and the intensity-modulator equivalent source.
//!
//! A rotating stage is modeled as a discrete sum of M random modes,
//! E(t) = M^-1/2 Σ exp(i(δω_m t + φ_m)), with mode offsets uniform over
//! the flat band [-Δω/2, +Δω/2] and phases uniform on [0, 2π). This gives
//! exact flat-band control; the finite mode count biases the single-stage
//! zero-lag bunching to 2 - 1/M (so -2/M per stage on a two-stage
//! cascade's 4), which the tests pin down.
//!
//! The cascade intensity is the product of the per-stage intensities with
//! independent per-stage seeds, unit mean by construction. Field blocks
//! are laid out on fixed boundaries and reductions are order-stable, so
//! every routine is bit-deterministic for a given seed regardless of the
//! worker count.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::cascade::CascadeSpec;
use crate::curve::G2Curve;
use crate::error::{Error, Result};
use crate::rng::{derive_rng, derive_seed, stream};
use crate::stats::{pairwise_sum, EmpiricalMoments};
use crate::trace::IntensityTrace;

/// fixed block length for field synthesis; block boundaries never depend
/// on the worker count
const SYNTH_BLOCK: usize = 8192;

/// chunk length for i.i.d. compound sampling
const SAMPLE_CHUNK: usize = 1 << 16;

/// bootstrap replicates used by `correlate`
const BOOTSTRAP_REPLICATES: usize = 200;

/// fixed internal seed: the correlator is a pure function of its inputs
const CORRELATE_BOOTSTRAP_SEED: u64 = 0x0DD_C0FFE;

fn check_resolution(bandwidth: f64, duration: f64, dt: f64) -> Result<usize> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::Domain(format!("bandwidth must be > 0, got {bandwidth}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Contract(format!("sample interval must be > 0, got {dt}")));
    }
    let dt_max = std::f64::consts::PI / bandwidth;
    if !(dt < dt_max) {
        return Err(Error::Contract(format!(
            "violated resolution bound dt < pi/bandwidth: dt = {dt:e}, bound = {dt_max:e}"
        )));
    }
    let tau_c = 2.0 * std::f64::consts::PI / bandwidth;
    if !(duration >= 100.0 * tau_c) {
        return Err(Error::Contract(format!(
            "violated duration bound duration >= 100 coherence times: duration = {duration:e}, bound = {:e}",
            100.0 * tau_c
        )));
    }
    Ok((duration / dt).round() as usize)
}

/// Synthesize one rotating stage as a baseband complex field.
///
/// `modes` is the number of random modes M (64 or more recommended; the
/// single-mode field has constant unit intensity). The time-averaged
/// intensity tends to 1 as the duration grows.
pub fn synthesize_stage_field(
    bandwidth: f64,
    duration: f64,
    dt: f64,
    modes: usize,
    seed: u64,
) -> Result<Vec<Complex64>> {
    let n = check_resolution(bandwidth, duration, dt)?;
    if modes < 1 {
        return Err(Error::Domain("mode count must be at least 1".into()));
    }
    let mut rng = derive_rng(seed, stream::STAGE_FIELD, 0);
    let circle = 2.0 * std::f64::consts::PI;
    let draws: Vec<(f64, f64)> = (0..modes)
        .map(|_| {
            let domega = bandwidth * (rng.random::<f64>() - 0.5);
            let phase = rng.random_range(0.0..circle);
            (domega, phase)
        })
        .collect();
    let norm = 1.0 / (modes as f64).sqrt();

    let n_blocks = n.div_ceil(SYNTH_BLOCK);
    let blocks: Vec<Vec<Complex64>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * SYNTH_BLOCK;
            let len = SYNTH_BLOCK.min(n - start);
            let t0 = start as f64 * dt;
            let mut buf = vec![Complex64::new(0.0, 0.0); len];
            for &(domega, phase) in &draws {
                let mut phasor = Complex64::from_polar(norm, domega * t0 + phase);
                let step = Complex64::from_polar(1.0, domega * dt);
                for slot in buf.iter_mut() {
                    *slot += phasor;
                    phasor *= step;
                }
            }
            buf
        })
        .collect();
    Ok(blocks.concat())
}

/// Cascaded intensity trace: the product of the rotating stages'
/// intensities with independent per-stage seeds; static stages contribute
/// a factor of 1. Unit mean intensity by construction; apply a physical
/// scale downstream if needed.
pub fn cascade_intensity_trace(
    spec: &CascadeSpec,
    duration: f64,
    dt: f64,
    modes: usize,
    seed: u64,
) -> Result<IntensityTrace> {
    if !(dt > 0.0 && duration >= 2.0 * dt) {
        return Err(Error::Contract(format!(
            "need dt > 0 and duration >= 2 dt, got dt = {dt}, duration = {duration}"
        )));
    }
    let n = (duration / dt).round() as usize;
    let mut samples = vec![1.0f64; n];
    for (j, stage) in spec.stages.iter().enumerate() {
        if !stage.rotating {
            continue;
        }
        let stage_seed = derive_seed(seed, stream::STAGE_FIELD, j as u64 + 1);
        let field = synthesize_stage_field(stage.bandwidth, duration, dt, modes, stage_seed)?;
        for (s, e) in samples.iter_mut().zip(&field) {
            *s *= e.norm_sqr();
        }
    }
    let mut trace = IntensityTrace::new(dt, samples)?;
    if let Some(tc) = spec.max_coherence_time() {
        trace = trace.with_coherence_hint(tc);
    }
    Ok(trace)
}

/// Build the snapped non-negative lag indices for a symmetric grid.
fn lag_indices(max_lag: f64, n_lags: usize, dt: f64) -> Result<Vec<usize>> {
    if n_lags < 3 || n_lags % 2 == 0 {
        return Err(Error::Contract(format!(
            "lag grid needs an odd point count >= 3, got {n_lags}"
        )));
    }
    let k_max = (max_lag / dt).round() as usize;
    if k_max == 0 {
        return Err(Error::Contract(format!(
            "max_lag {max_lag:e} is below one sample interval {dt:e}"
        )));
    }
    let half = (n_lags - 1) / 2;
    let mut ks: Vec<usize> = (0..=half)
        .map(|i| ((i as f64 / half as f64) * k_max as f64).round() as usize)
        .collect();
    ks.dedup();
    Ok(ks)
}

/// Direct correlation estimate of g²(τ) = ⟨I(t)I(t+τ)⟩ / ⟨I⟩².
///
/// Lags snap to multiples of the sample interval on a symmetric grid of
/// `n_lags` points (odd, so τ = 0 is included; duplicate snapped lags are
/// merged). Standard errors come from a block bootstrap whose block
/// length is at least 10 coherence times of the generating cascade (the
/// trace's coherence hint); the bootstrap uses a fixed internal seed so
/// the estimator is a pure function of its inputs.
pub fn correlate(trace: &IntensityTrace, max_lag: f64, n_lags: usize) -> Result<G2Curve> {
    let n = trace.len();
    let dt = trace.dt();
    let duration = trace.duration();
    if !(max_lag > 0.0 && max_lag.is_finite()) {
        return Err(Error::Domain(format!("max_lag must be > 0, got {max_lag}")));
    }
    if max_lag > duration / 10.0 {
        return Err(Error::Contract(format!(
            "violated lag bound max_lag <= duration/10: max_lag = {max_lag:e}, bound = {:e}",
            duration / 10.0
        )));
    }
    if let Some(tc) = trace.coherence_hint() {
        if duration < 100.0 * tc {
            return Err(Error::Contract(format!(
                "violated duration bound duration >= 100 coherence times: duration = {duration:e}, bound = {:e}",
                100.0 * tc
            )));
        }
    }
    let ks = lag_indices(max_lag, n_lags, dt)?;
    let k_max = *ks.last().unwrap();
    let base = n - k_max; // common support for every lag

    // block length: >= 10 coherence times; fallback for hint-less traces
    let block_time = trace
        .coherence_hint()
        .map(|tc| 10.0 * tc)
        .unwrap_or_else(|| (duration / 50.0).max(2.0 * max_lag));
    let block_len = ((block_time / dt).ceil() as usize).clamp(1, base);
    let n_blocks = base / block_len;

    let samples = trace.samples();
    // prefix sums for the intensity means over arbitrary index windows
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    let mut acc = 0.0;
    for &s in samples {
        acc += s;
        cum.push(acc);
    }
    let window_sum = |lo: usize, hi: usize| cum[hi] - cum[lo];

    // shared bootstrap block draws (one set of indices per replicate)
    let replicates: Vec<Vec<u32>> = if n_blocks >= 2 {
        let mut rng = derive_rng(CORRELATE_BOOTSTRAP_SEED, stream::BOOTSTRAP, 0);
        (0..BOOTSTRAP_REPLICATES)
            .map(|_| (0..n_blocks).map(|_| rng.random_range(0..n_blocks as u32)).collect())
            .collect()
    } else {
        Vec::new()
    };

    let estimates: Vec<(f64, f64)> = ks
        .par_iter()
        .map(|&k| {
            // per-block product sums over the common support
            let mut block_p = Vec::with_capacity(n_blocks);
            for b in 0..n_blocks {
                let lo = b * block_len;
                let hi = lo + block_len;
                let mut s = 0.0;
                for t in lo..hi {
                    s += samples[t] * samples[t + k];
                }
                block_p.push(s);
            }
            let mut tail_p = 0.0;
            for t in n_blocks * block_len..base {
                tail_p += samples[t] * samples[t + k];
            }
            let mean_p = (pairwise_sum(&block_p) + tail_p) / base as f64;
            let mean_0 = window_sum(0, base) / base as f64;
            let mean_k = window_sum(k, k + base) / base as f64;
            let value = mean_p / (mean_0 * mean_k);

            let stderr = if n_blocks >= 2 {
                let vals: Vec<f64> = replicates
                    .iter()
                    .map(|idx| {
                        let mut sp = 0.0;
                        let mut s0 = 0.0;
                        let mut sk = 0.0;
                        for &b in idx {
                            let lo = b as usize * block_len;
                            let hi = lo + block_len;
                            sp += block_p[b as usize];
                            s0 += window_sum(lo, hi);
                            sk += window_sum(lo + k, hi + k);
                        }
                        let c = (idx.len() * block_len) as f64;
                        (sp / c) / ((s0 / c) * (sk / c))
                    })
                    .collect();
                // spread of the bootstrap replicates around their mean
                let (_, se_of_mean) = crate::stats::mean_stderr(&vals);
                se_of_mean * (vals.len() as f64).sqrt()
            } else {
                0.0
            };
            (value, stderr)
        })
        .collect();

    // mirror onto the symmetric grid: the estimator is even in τ
    let mut lags = Vec::with_capacity(2 * ks.len() - 1);
    let mut values = Vec::with_capacity(2 * ks.len() - 1);
    let mut errs = Vec::with_capacity(2 * ks.len() - 1);
    for (&k, est) in ks.iter().zip(&estimates).rev() {
        if k == 0 {
            continue;
        }
        lags.push(-(k as f64) * dt);
        values.push(est.0);
        errs.push(est.1);
    }
    for (&k, est) in ks.iter().zip(&estimates) {
        lags.push(k as f64 * dt);
        values.push(est.0);
        errs.push(est.1);
    }
    G2Curve::new(lags, values, errs)
}

/// Samples of the n-fold product of independent unit-mean exponentials,
/// scaled by `mean`: the one-point intensity law after n randomizing
/// stages.
#[derive(Debug, Clone)]
pub struct IntensitySampleSet {
    pub n_stages: u32,
    pub mean: f64,
    samples: Vec<f64>,
}

impl IntensitySampleSet {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn empirical_moments(&self, orders: &[u32]) -> EmpiricalMoments {
        EmpiricalMoments::from_iid(&self.samples, orders)
    }

    /// ⟨I²⟩/⟨I⟩² with a delta-method standard error (the ratio's influence
    /// function accounts for numerator/denominator correlation).
    pub fn bunching_ratio(&self) -> (f64, f64) {
        let m1 = crate::stats::mean(&self.samples);
        let sq: Vec<f64> = self.samples.iter().map(|&x| x * x).collect();
        let m2 = crate::stats::mean(&sq);
        let ratio = m2 / (m1 * m1);
        let n = self.samples.len() as f64;
        let infl: Vec<f64> = self
            .samples
            .iter()
            .map(|&x| (x * x - m2) / (m1 * m1) - 2.0 * m2 * (x - m1) / (m1 * m1 * m1))
            .collect();
        let var = pairwise_sum(&infl.iter().map(|v| v * v).collect::<Vec<_>>()) / (n - 1.0);
        (ratio, (var / n).sqrt())
    }
}

/// Draw `count` compound intensity samples: ⟨I⟩ · Π_{j=1..n} X_j with X_j
/// i.i.d. unit-mean exponentials. Chunked counter-based seeding keeps the
/// sample vector identical for any worker count.
pub fn sample_compound_intensity(
    n_stages: u32,
    mean: f64,
    count: usize,
    seed: u64,
) -> Result<IntensitySampleSet> {
    if n_stages < 1 {
        return Err(Error::Domain("stage count must be at least 1".into()));
    }
    if count < 1 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::Domain(format!("mean intensity must be > 0, got {mean}")));
    }
    let n_chunks = count.div_ceil(SAMPLE_CHUNK);
    let chunks: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = derive_rng(seed, stream::COMPOUND_SAMPLES, c as u64);
            let len = SAMPLE_CHUNK.min(count - c * SAMPLE_CHUNK);
            (0..len)
                .map(|_| {
                    let mut x = mean;
                    for _ in 0..n_stages {
                        x *= -(1.0 - rng.random::<f64>()).ln();
                    }
                    x
                })
                .collect()
        })
        .collect();
    Ok(IntensitySampleSet {
        n_stages,
        mean,
        samples: chunks.concat(),
    })
}

/// The revised source: an intensity modulator imprints the n-stage
/// compound law (piecewise constant over one modulator dwell) on coherent
/// light, which then passes a single rotating stage.
///
/// The stationary one-point distribution is the (n+1)-stage compound law.
/// `dwell` defaults to one tenth of the final stage's coherence time; as
/// the dwell shrinks the curve approaches the cascade whose premodulation
/// bandwidth is the dwell-equivalent 2π/dwell.
pub fn im_equivalent_trace(
    n_premod: u32,
    final_bandwidth: f64,
    duration: f64,
    dt: f64,
    modes: usize,
    dwell: Option<f64>,
    seed: u64,
) -> Result<IntensityTrace> {
    if n_premod < 1 {
        return Err(Error::Domain("premodulation stage count must be at least 1".into()));
    }
    let tau_c = 2.0 * std::f64::consts::PI / final_bandwidth;
    let dwell = dwell.unwrap_or(tau_c / 10.0);
    if !(dwell > 0.0 && dwell.is_finite()) {
        return Err(Error::Domain(format!("dwell must be > 0, got {dwell}")));
    }
    let field = synthesize_stage_field(
        final_bandwidth,
        duration,
        dt,
        modes,
        derive_seed(seed, stream::IM_MODULATOR, 1),
    )?;
    let n = field.len();
    let hold = ((dwell / dt).ceil() as usize).max(1);
    let n_cells = n.div_ceil(hold);
    let mut rng = derive_rng(seed, stream::IM_MODULATOR, 0);
    let cells: Vec<f64> = (0..n_cells)
        .map(|_| {
            let mut x = 1.0;
            for _ in 0..n_premod {
                x *= -(1.0 - rng.random::<f64>()).ln();
            }
            x
        })
        .collect();
    let samples: Vec<f64> = field
        .iter()
        .enumerate()
        .map(|(k, e)| cells[k / hold] * e.norm_sqr())
        .collect();
    Ok(IntensityTrace::new(dt, samples)?.with_coherence_hint(tau_c.max(dwell)))
}
