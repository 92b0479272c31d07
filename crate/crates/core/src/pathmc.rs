//! Two-photon path-interference Monte Carlo.
//!
//! For N randomizing stages there are 2^N indistinguishable alternatives
//! for a photon pair to trigger a coincidence: at every stage one photon
//! sits at scatterer position a and the other at b, consecutive stages may
//! connect in parallel or crossed, and the final pair maps to the two
//! detectors in either order. Each alternative carries a probability
//! amplitude built from random initial phases and temporal propagators
//! exp(-iω Δt); summing amplitudes before squaring (indistinguishable
//! case) produces the bunching, while summing probabilities
//! (distinguishable case) gives a flat g² = 1.
//!
//! Detector positions are symmetric and the source is point-like, so
//! detection times enter every product only through the lag τ = t₁ − t₂.
//! Concretely, a-side scatterer events and detector 1 carry time τ while
//! b-side events and detector 2 carry time 0; the constant propagation
//! delays cancel in all amplitude products and are dropped.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;

use crate::cascade::CascadeSpec;
use crate::curve::G2Curve;
use crate::error::{Error, Result};
use crate::rng::{derive_rng, stream};
use crate::stats::{mean_stderr, pairwise_sum};

/// Scatterer label at one stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scatterer {
    A,
    B,
}

impl Scatterer {
    fn other(self) -> Self {
        match self {
            Scatterer::A => Scatterer::B,
            Scatterer::B => Scatterer::A,
        }
    }

    /// Event-time indicator under the symmetric-position convention:
    /// a-side events happen at τ (index 1), b-side at 0.
    fn time_index(self) -> f64 {
        match self {
            Scatterer::A => 1.0,
            Scatterer::B => 0.0,
        }
    }

    fn slot(self) -> usize {
        match self {
            Scatterer::A => 0,
            Scatterer::B => 1,
        }
    }
}

/// Detector label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    D1,
    D2,
}

impl Detector {
    fn time_index(self) -> f64 {
        match self {
            Detector::D1 => 1.0,
            Detector::D2 => 0.0,
        }
    }

    fn other(self) -> Self {
        match self {
            Detector::D1 => Detector::D2,
            Detector::D2 => Detector::D1,
        }
    }
}

/// One of the 2^N alternatives for the photon pair.
///
/// `route_a` is the stage-by-stage position of the photon that starts at
/// a₁; `route_b` is the complementary route of the partner photon, and
/// `detector_a` names the detector reached by the first photon (the
/// partner reaches the other one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoPhotonPath {
    pub route_a: Vec<Scatterer>,
    pub route_b: Vec<Scatterer>,
    pub detector_a: Detector,
}

impl TwoPhotonPath {
    pub fn n_stages(&self) -> usize {
        self.route_a.len()
    }

    pub fn detector_b(&self) -> Detector {
        self.detector_a.other()
    }
}

/// Random phases and frequencies for every scatterer position.
///
/// Rotating stages draw one phase (uniform on [0, 2π)) and one frequency
/// (uniform over the stage band around ω₀) per scatterer label; static
/// stages share a fixed zero phase and the central frequency for both
/// labels. All draws are independent across stages, labels, and
/// realizations.
#[derive(Debug, Clone)]
pub struct PhaseFrequencyDraw {
    /// `phases[stage][slot]`, slot 0 = a, 1 = b
    pub phases: Vec<[f64; 2]>,
    /// `frequencies[stage][slot]`
    pub frequencies: Vec<[f64; 2]>,
}

impl PhaseFrequencyDraw {
    /// Draw order is fixed (per stage: φ_a, φ_b, ω_a, ω_b) so results are
    /// reproducible for a given RNG stream.
    pub fn sample<R: Rng>(spec: &CascadeSpec, rng: &mut R) -> Self {
        let tau_circle = 2.0 * std::f64::consts::PI;
        let mut phases = Vec::with_capacity(spec.stages.len());
        let mut frequencies = Vec::with_capacity(spec.stages.len());
        for stage in &spec.stages {
            if stage.rotating {
                let pa = rng.random_range(0.0..tau_circle);
                let pb = rng.random_range(0.0..tau_circle);
                let wa = spec.central_frequency + stage.bandwidth * (rng.random::<f64>() - 0.5);
                let wb = spec.central_frequency + stage.bandwidth * (rng.random::<f64>() - 0.5);
                phases.push([pa, pb]);
                frequencies.push([wa, wb]);
            } else {
                phases.push([0.0, 0.0]);
                frequencies.push([spec.central_frequency, spec.central_frequency]);
            }
        }
        PhaseFrequencyDraw { phases, frequencies }
    }

    pub fn n_stages(&self) -> usize {
        self.phases.len()
    }
}

/// Enumerate the 2^N alternatives by the recursive doubling rule: the
/// 2^(N-1) routes through the first N−1 stages each split over the final
/// parallel/crossed connection, and the whole family doubles again over
/// the detector exchange.
pub fn enumerate_paths(n_stages: u32) -> Result<Vec<TwoPhotonPath>> {
    if !(1..=20).contains(&n_stages) {
        return Err(Error::Range(format!(
            "path enumeration supports 1..=20 stages (2^N growth), got {n_stages}"
        )));
    }
    let n = n_stages as usize;
    let count = 1usize << n;
    let mut paths = Vec::with_capacity(count);
    for index in 0..count {
        let mut route_a = Vec::with_capacity(n);
        let mut pos = Scatterer::A;
        route_a.push(pos);
        for j in 0..n - 1 {
            if index >> j & 1 == 1 {
                pos = pos.other();
            }
            route_a.push(pos);
        }
        let swap = index >> (n - 1) & 1 == 1;
        let detector_a = match (pos, swap) {
            (Scatterer::A, false) => Detector::D1,
            (Scatterer::A, true) => Detector::D2,
            (Scatterer::B, false) => Detector::D2,
            (Scatterer::B, true) => Detector::D1,
        };
        let route_b = route_a.iter().map(|s| s.other()).collect();
        paths.push(TwoPhotonPath {
            route_a,
            route_b,
            detector_a,
        });
    }
    Ok(paths)
}

/// Accumulated phase of one photon along its route: the initial-scatterer
/// phase plus -ω·Δt per hop, with event times τ (a-side / D1) or 0
/// (b-side / D2).
fn photon_phase(
    route: &[Scatterer],
    detector: Detector,
    draw: &PhaseFrequencyDraw,
    tau: f64,
) -> f64 {
    let n = route.len();
    let mut phase = draw.phases[0][route[0].slot()];
    for j in 0..n {
        let omega = draw.frequencies[j][route[j].slot()];
        let t_next = if j + 1 < n {
            route[j + 1].time_index()
        } else {
            detector.time_index()
        };
        phase -= omega * (t_next - route[j].time_index()) * tau;
    }
    phase
}

/// Probability amplitude of one alternative; always unit modulus.
pub fn path_amplitude(path: &TwoPhotonPath, draw: &PhaseFrequencyDraw, tau: f64) -> Result<Complex64> {
    if path.n_stages() != draw.n_stages() {
        return Err(Error::Contract(format!(
            "draw covers {} stages but path has {}",
            draw.n_stages(),
            path.n_stages()
        )));
    }
    let phase = photon_phase(&path.route_a, path.detector_a, draw, tau)
        + photon_phase(&path.route_b, path.detector_b(), draw, tau);
    Ok(Complex64::from_polar(1.0, phase))
}

fn mc_preconditions(spec: &CascadeSpec, realizations: u64) -> Result<u32> {
    if realizations < 1000 {
        return Err(Error::Contract(format!(
            "need at least 1000 realizations for a meaningful estimate, got {realizations}"
        )));
    }
    let n_eff = spec.n_rotating() as u32;
    if n_eff > 12 {
        return Err(Error::Range(format!(
            "path Monte Carlo supports up to 12 rotating stages (2^N amplitudes per realization), got {n_eff}"
        )));
    }
    Ok(n_eff)
}

/// Reduce a cascade to its rotating stages: a static plate adds no
/// detection alternatives, so only randomizing stages enter the path sum.
fn rotating_only(spec: &CascadeSpec) -> CascadeSpec {
    CascadeSpec {
        stages: spec.rotating_stages().cloned().collect(),
        central_frequency: spec.central_frequency,
    }
}

fn per_realization_coherent(paths: &[TwoPhotonPath], spec: &CascadeSpec, tau: f64, rng_out: &mut impl Rng) -> f64 {
    let draw = PhaseFrequencyDraw::sample(spec, rng_out);
    let mut sum = Complex64::new(0.0, 0.0);
    for p in paths {
        // dimensions match by construction; unwrap cannot fire
        sum += path_amplitude(p, &draw, tau).unwrap();
    }
    sum.norm_sqr()
}

fn g2_mc_with_counter_base(
    spec: &CascadeSpec,
    tau: f64,
    realizations: u64,
    seed: u64,
    counter_base: u64,
) -> Result<(f64, f64)> {
    let n_eff = mc_preconditions(spec, realizations)?;
    if n_eff == 0 {
        return Ok((1.0, 0.0)); // coherent light: single alternative, no bunching
    }
    let reduced = rotating_only(spec);
    let paths = enumerate_paths(n_eff)?;
    let background = (1u64 << n_eff) as f64; // Σ|A_j|² = 2^N exactly per realization
    let coherent: Vec<f64> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = derive_rng(seed, stream::PATH_MC, counter_base + r);
            per_realization_coherent(&paths, &reduced, tau, &mut rng)
        })
        .collect();
    let (m, se) = mean_stderr(&coherent);
    Ok((m / background, se / background))
}

/// Monte Carlo estimate of g²(τ) with the indistinguishable path sum.
///
/// Returns `(estimate, standard error)`: the mean over realizations of
/// |Σ A_j|², normalized by the autocorrelation background Σ |A_j|² = 2^N.
/// Per-realization seeds are derived by counter splitting, so the result
/// is bit-identical for any worker count.
pub fn g2_mc(spec: &CascadeSpec, tau: f64, realizations: u64, seed: u64) -> Result<(f64, f64)> {
    g2_mc_with_counter_base(spec, tau, realizations, seed, 0)
}

/// g²(τ) when the alternatives are distinguishable: probabilities are
/// summed instead of amplitudes, every cross term disappears, and the
/// result is identically 1.
pub fn g2_distinguishable(spec: &CascadeSpec, tau: f64, realizations: u64, seed: u64) -> Result<f64> {
    let n_eff = mc_preconditions(spec, realizations)?;
    if n_eff == 0 {
        return Ok(1.0);
    }
    let reduced = rotating_only(spec);
    let paths = enumerate_paths(n_eff)?;
    let background = (1u64 << n_eff) as f64;
    let incoherent: Vec<f64> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = derive_rng(seed, stream::PATH_MC, r);
            let draw = PhaseFrequencyDraw::sample(&reduced, &mut rng);
            let s: Vec<f64> = paths
                .iter()
                .map(|p| path_amplitude(p, &draw, tau).unwrap().norm_sqr())
                .collect();
            pairwise_sum(&s)
        })
        .collect();
    Ok(pairwise_sum(&incoherent) / realizations as f64 / background)
}

/// Monte Carlo g² on a lag grid; per-lag estimates use disjoint counter
/// ranges of the same seed so the points are statistically independent.
pub fn g2_mc_curve(
    spec: &CascadeSpec,
    lags: &[f64],
    realizations: u64,
    seed: u64,
) -> Result<G2Curve> {
    let mut values = Vec::with_capacity(lags.len());
    let mut errs = Vec::with_capacity(lags.len());
    for (i, &tau) in lags.iter().enumerate() {
        let (v, e) = g2_mc_with_counter_base(spec, tau, realizations, seed, i as u64 * realizations)?;
        values.push(v);
        errs.push(e);
    }
    G2Curve::new(lags.to_vec(), values, errs)
}

/// Term bookkeeping of |Σ A_j|² after expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermCensus {
    /// (2^N)² terms in the expanded modulus square.
    pub total_terms: u64,
    /// 2^N self terms that form the flat background.
    pub autocorrelation_terms: u64,
    /// Cross terms grouped by which stages contribute a sinc² factor
    /// after the ensemble average; keys are 1-based stage index sets.
    pub cross_groups: BTreeMap<Vec<u32>, u64>,
}

/// Expand |Σ A_j|² symbolically and classify every term by the pattern of
/// surviving frequency exponents.
///
/// Each amplitude's phase is a linear form in the 2N scatterer
/// frequencies; in a product A_j A_k* the random initial phases cancel
/// identically and the net frequency exponents per stage are either zero
/// (the term contributes to the background) or an opposite ±1 pair on the
/// a/b labels, which the flat-band average turns into a sinc² factor of
/// that stage's bandwidth.
pub fn term_census(n_stages: u32) -> Result<TermCensus> {
    if !(1..=12).contains(&n_stages) {
        return Err(Error::Range(format!(
            "term census supports 1..=12 stages, got {n_stages}"
        )));
    }
    let n = n_stages as usize;
    let paths = enumerate_paths(n_stages)?;

    // integer frequency-exponent vector of one path: coefficient of
    // ω[stage][slot]·τ in the amplitude phase
    let exponents = |p: &TwoPhotonPath| -> Vec<i32> {
        let mut v = vec![0i32; 2 * n];
        let mut add_route = |route: &[Scatterer], det: Detector| {
            for j in 0..n {
                let t_cur = route[j].time_index() as i32;
                let t_next = if j + 1 < n {
                    route[j + 1].time_index() as i32
                } else {
                    det.time_index() as i32
                };
                v[2 * j + route[j].slot()] += t_cur - t_next;
            }
        };
        add_route(&p.route_a, p.detector_a);
        add_route(&p.route_b, p.detector_b());
        v
    };
    let expo: Vec<Vec<i32>> = paths.iter().map(exponents).collect();

    let mut autocorrelation_terms = 0u64;
    let mut cross_groups: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for ej in &expo {
        for ek in &expo {
            let net: Vec<i32> = ej.iter().zip(ek).map(|(a, b)| a - b).collect();
            // per stage the a/b exponents must cancel pairwise
            debug_assert!((0..n).all(|j| net[2 * j] + net[2 * j + 1] == 0));
            let stages: Vec<u32> = (0..n)
                .filter(|&j| net[2 * j] != 0)
                .map(|j| j as u32 + 1)
                .collect();
            if stages.is_empty() {
                autocorrelation_terms += 1;
            } else {
                *cross_groups.entry(stages).or_insert(0) += 1;
            }
        }
    }
    Ok(TermCensus {
        total_terms: (paths.len() as u64).pow(2),
        autocorrelation_terms,
        cross_groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{g2_cascade, g2_zero};
    use crate::cascade::SpectralStage;

    fn spec_n(bandwidths: &[f64]) -> CascadeSpec {
        CascadeSpec::all_rotating(bandwidths).unwrap()
    }

    #[test]
    fn enumeration_counts_match_doubling_rule() {
        assert_eq!(enumerate_paths(1).unwrap().len(), 2);
        assert_eq!(enumerate_paths(2).unwrap().len(), 4);
        assert_eq!(enumerate_paths(3).unwrap().len(), 8);
        assert!(enumerate_paths(0).is_err());
        assert!(enumerate_paths(21).is_err());
    }

    #[test]
    fn paths_are_distinct_and_complementary() {
        let paths = enumerate_paths(3).unwrap();
        for (i, p) in paths.iter().enumerate() {
            // one photon at each scatterer per stage
            for j in 0..3 {
                assert_ne!(p.route_a[j], p.route_b[j]);
            }
            for q in &paths[i + 1..] {
                assert_ne!(p, q);
            }
        }
    }

    #[test]
    fn two_stage_enumeration_matches_listed_alternatives() {
        use Detector::*;
        use Scatterer::*;
        let expected = [
            (vec![A, A], D1), // a1-a2-D1 with b1-b2-D2
            (vec![A, A], D2), // a1-a2-D2 with b1-b2-D1
            (vec![A, B], D2), // a1-b2-D2 with b1-a2-D1
            (vec![A, B], D1), // a1-b2-D1 with b1-a2-D2
        ];
        let paths = enumerate_paths(2).unwrap();
        for (route, det) in expected {
            assert!(
                paths
                    .iter()
                    .any(|p| p.route_a == route && p.detector_a == det),
                "missing alternative {route:?} -> {det:?}"
            );
        }
    }

    #[test]
    fn amplitudes_are_unit_modulus() {
        let spec = spec_n(&[2e6, 5e5, 1e6]);
        let mut rng = derive_rng(3, stream::PATH_MC, 0);
        let draw = PhaseFrequencyDraw::sample(&spec, &mut rng);
        for p in enumerate_paths(3).unwrap() {
            let a = path_amplitude(&p, &draw, 1.7e-6).unwrap();
            assert!((a.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn single_stage_amplitudes_coincide_at_zero_lag() {
        let spec = spec_n(&[2e6]);
        let mut rng = derive_rng(11, stream::PATH_MC, 4);
        let draw = PhaseFrequencyDraw::sample(&spec, &mut rng);
        let paths = enumerate_paths(1).unwrap();
        let a1 = path_amplitude(&paths[0], &draw, 0.0).unwrap();
        let a2 = path_amplitude(&paths[1], &draw, 0.0).unwrap();
        assert!((a1 - a2).norm() < 1e-14);
    }

    #[test]
    fn single_stage_cross_term_is_the_beat_phase() {
        // A1·A2* = exp(-i (ω_a - ω_b) τ) with no leftover fixed phase
        let spec = spec_n(&[3e6]);
        let mut rng = derive_rng(5, stream::PATH_MC, 9);
        let draw = PhaseFrequencyDraw::sample(&spec, &mut rng);
        let paths = enumerate_paths(1).unwrap();
        let tau = 0.83e-6;
        let a1 = path_amplitude(&paths[0], &draw, tau).unwrap();
        let a2 = path_amplitude(&paths[1], &draw, tau).unwrap();
        let got = a1 * a2.conj();
        let beat = -(draw.frequencies[0][0] - draw.frequencies[0][1]) * tau;
        let want = Complex64::from_polar(1.0, beat);
        assert!((got - want).norm() < 1e-9, "got {got}, want {want}");
    }

    #[test]
    fn dimension_mismatch_is_a_contract_violation() {
        let spec = spec_n(&[3e6]);
        let mut rng = derive_rng(5, stream::PATH_MC, 0);
        let draw = PhaseFrequencyDraw::sample(&spec, &mut rng);
        let paths = enumerate_paths(2).unwrap();
        assert!(matches!(
            path_amplitude(&paths[0], &draw, 0.0),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn zero_lag_reproduces_the_power_law() {
        for n in 1..=4usize {
            let bands: Vec<f64> = (0..n).map(|i| 1e6 * (1 + i) as f64).collect();
            let (est, se) = g2_mc(&spec_n(&bands), 0.0, 2000, 42).unwrap();
            let want = g2_zero(n as u32).unwrap();
            assert!(
                (est - want).abs() <= 3.0 * se + 1e-9,
                "N={n}: {est} ± {se} vs {want}"
            );
        }
    }

    #[test]
    fn sinc_zero_lag_gives_unity() {
        let dw = 2e6;
        let tau = 2.0 * std::f64::consts::PI / dw;
        let (est, se) = g2_mc(&spec_n(&[dw]), tau, 20_000, 7).unwrap();
        assert!((est - 1.0).abs() <= 3.0 * se.max(1e-4), "{est} ± {se}");
    }

    #[test]
    fn static_stages_do_not_contribute_alternatives() {
        let mixed = CascadeSpec::new(
            vec![
                SpectralStage::fixed(),
                SpectralStage::rotating(2e6),
                SpectralStage::fixed(),
            ],
            0.0,
        )
        .unwrap();
        let (est, se) = g2_mc(&mixed, 0.0, 2000, 3).unwrap();
        assert!((est - 2.0).abs() <= 3.0 * se + 1e-9, "{est} ± {se}");

        let all_static = CascadeSpec::new(vec![SpectralStage::fixed(); 2], 0.0).unwrap();
        assert_eq!(g2_mc(&all_static, 0.5, 2000, 3).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn phase_randomness_alone_sustains_the_bunching_ratio() {
        // vanishing bandwidth: all frequencies essentially equal, phases random
        let spec = spec_n(&[1e-12, 1e-12]);
        let (est, se) = g2_mc(&spec, 123.0, 2000, 9).unwrap();
        assert!((est - 4.0).abs() <= 3.0 * se + 1e-6, "{est} ± {se}");
    }

    #[test]
    fn curve_matches_analytics_within_errors() {
        let spec = spec_n(&[2e6, 6e5]);
        let tau_c = spec.max_coherence_time().unwrap();
        let lags = crate::curve::symmetric_lag_grid(2.0 * tau_c, 11).unwrap();
        let mc = g2_mc_curve(&spec, &lags, 4000, 17).unwrap();
        for i in 0..lags.len() {
            let want = g2_cascade(lags[i], &spec).unwrap();
            let z = (mc.values()[i] - want).abs() / mc.stderr()[i].max(1e-6);
            assert!(z < 4.0, "lag {}: {} vs {} (z={z})", lags[i], mc.values()[i], want);
        }
    }

    #[test]
    fn exchange_symmetry_within_errors() {
        let spec = spec_n(&[2e6]);
        let tau = 0.9e-6;
        let (gp, sp) = g2_mc(&spec, tau, 20_000, 5).unwrap();
        let (gm, sm) = g2_mc(&spec, -tau, 20_000, 6).unwrap();
        let pooled = (sp * sp + sm * sm).sqrt();
        assert!((gp - gm).abs() <= 3.0 * pooled, "{gp} vs {gm}");
    }

    #[test]
    fn distinguishable_paths_are_flat() {
        for n in 1..=3usize {
            let bands: Vec<f64> = (0..n).map(|i| 1e6 * (1 + i) as f64).collect();
            for tau in [0.0, 0.3e-6, 2.0e-6] {
                let v = g2_distinguishable(&spec_n(&bands), tau, 1500, 21).unwrap();
                assert!((v - 1.0).abs() < 1e-12, "N={n}, tau={tau}: {v}");
            }
        }
    }

    #[test]
    fn background_is_exact_path_count() {
        let spec = spec_n(&[1e6, 2e6, 3e6]);
        let mut rng = derive_rng(1, stream::PATH_MC, 0);
        let draw = PhaseFrequencyDraw::sample(&spec, &mut rng);
        let paths = enumerate_paths(3).unwrap();
        let total: f64 = paths
            .iter()
            .map(|p| path_amplitude(p, &draw, 0.7e-6).unwrap().norm_sqr())
            .sum();
        assert!((total - 8.0).abs() < 1e-12);
    }

    #[test]
    fn preconditions_are_enforced() {
        let spec = spec_n(&[1e6]);
        assert!(matches!(g2_mc(&spec, 0.0, 10, 0), Err(Error::Contract(_))));
        let big = spec_n(&[1e6; 13]);
        assert!(matches!(g2_mc(&big, 0.0, 2000, 0), Err(Error::Range(_))));
    }

    #[test]
    fn census_matches_two_stage_group_structure() {
        let c1 = term_census(1).unwrap();
        assert_eq!(c1.total_terms, 4);
        assert_eq!(c1.autocorrelation_terms, 2);
        assert_eq!(c1.cross_groups, BTreeMap::from([(vec![1], 2)]));

        let c2 = term_census(2).unwrap();
        assert_eq!(c2.total_terms, 16);
        assert_eq!(c2.autocorrelation_terms, 4);
        assert_eq!(
            c2.cross_groups,
            BTreeMap::from([(vec![1], 4), (vec![2], 4), (vec![1, 2], 4)])
        );

        let c3 = term_census(3).unwrap();
        assert_eq!(c3.total_terms, 64);
        assert_eq!(c3.autocorrelation_terms, 8);
        assert_eq!(c3.cross_groups.values().sum::<u64>(), 56);
        // combinatorial oracle: every nonempty stage subset appears 2^N times
        assert_eq!(c3.cross_groups.len(), 7);
        assert!(c3.cross_groups.values().all(|&c| c == 8));
    }

    #[test]
    fn census_ratio_reproduces_the_power_law() {
        for n in 1..=6u32 {
            let c = term_census(n).unwrap();
            assert_eq!(
                c.total_terms as f64 / c.autocorrelation_terms as f64,
                g2_zero(n).unwrap()
            );
        }
    }

    #[test]
    fn fixed_seed_is_deterministic_across_worker_counts() {
        let spec = spec_n(&[2e6, 7e5]);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| g2_mc(&spec, 0.4e-6, 3000, 99).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
    }
}
