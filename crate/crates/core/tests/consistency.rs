//! Cross-route consistency: the closed forms, the photon-path Monte
//! Carlo, and the stochastic field simulation must describe the same
//! light.

use pseudothermal::analytics::{g2_cascade, moment};
use pseudothermal::cascade::CascadeSpec;
use pseudothermal::curve::symmetric_lag_grid;
use pseudothermal::pathmc::g2_mc_curve;
use pseudothermal::speckle::{cascade_intensity_trace, correlate, im_equivalent_trace, sample_compound_intensity};

const BW_SLOW: f64 = 2.922_431_223_445_284e6; // coherence time 2.15 us
const BW_FAST: f64 = 5.817_764_173_314_43e6; // coherence time 1.08 us

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

#[test]
fn path_mc_curve_matches_closed_form() {
    let spec = CascadeSpec::all_rotating(&[BW_SLOW, BW_FAST]).unwrap();
    let tc = spec.max_coherence_time().unwrap();
    let lags = symmetric_lag_grid(3.0 * tc, 21).unwrap();
    let mc = g2_mc_curve(&spec, &lags, 20_000, 2024).unwrap();
    let dev = rms(
        mc.lags()
            .iter()
            .zip(mc.values())
            .map(|(&l, &v)| v - g2_cascade(l, &spec).unwrap()),
    );
    let pooled = mc.pooled_stderr();
    assert!(dev <= 3.0 * pooled, "MC rms deviation {dev} vs pooled {pooled}");
    assert!(dev < 0.1, "MC absolute rms deviation {dev}");
}

#[test]
fn path_mc_curves_match_closed_form_up_to_four_stages() {
    for n in 3..=4u32 {
        let bands: Vec<f64> = (0..n).map(|j| 1.0e6 * 1.6f64.powi(j as i32)).collect();
        let spec = CascadeSpec::all_rotating(&bands).unwrap();
        let tc = spec.max_coherence_time().unwrap();
        let lags = symmetric_lag_grid(3.0 * tc, 21).unwrap();
        let mc = g2_mc_curve(&spec, &lags, 8_000, 900 + n as u64).unwrap();
        let dev = rms(
            mc.lags()
                .iter()
                .zip(mc.values())
                .map(|(&l, &v)| v - g2_cascade(l, &spec).unwrap()),
        );
        let pooled = mc.pooled_stderr();
        assert!(dev <= 3.0 * pooled, "N={n}: rms {dev} vs pooled {pooled}");
    }
}

#[test]
fn field_simulation_curve_matches_closed_form() {
    let spec = CascadeSpec::all_rotating(&[BW_SLOW, BW_FAST]).unwrap();
    let tc_max = spec.max_coherence_time().unwrap();
    let tc_min = spec.min_coherence_time().unwrap();
    let trace = cascade_intensity_trace(&spec, 3000.0 * tc_max, tc_min / 40.0, 256, 512).unwrap();
    let curve = correlate(&trace, 3.0 * tc_max, 21).unwrap();
    let dev = rms(
        curve
            .lags()
            .iter()
            .zip(curve.values())
            .map(|(&l, &v)| v - g2_cascade(l, &spec).unwrap()),
    );
    let pooled = curve.pooled_stderr();
    assert!(dev <= 3.0 * pooled, "sim rms deviation {dev} vs pooled {pooled}");
    assert!(dev < 0.1, "sim absolute rms deviation {dev}");
}

#[test]
fn factorial_moment_law_cross_checked_by_sampling() {
    // third moment after two stages: (3!)^2 = 36
    let set = sample_compound_intensity(2, 1.0, 10_000_000, 77).unwrap();
    let m = set.empirical_moments(&[3]);
    let want = moment(3, 2, 1.0).unwrap();
    assert_eq!(want, 36.0);
    let z = (m.values[0] - want).abs() / m.stderrs[0];
    assert!(z < 3.0, "m3 = {} +- {} (z = {z})", m.values[0], m.stderrs[0]);
}

/// Moment ladder: sampled q-th moments track (q!)^n for q <= 3, n <= 5.
/// The relative spread of the q-th moment estimator grows like
/// ((2q)!^n / (q!)^2n - 1)^1/2 / sqrt(N), so the high (q, n) corner is
/// only loosely pinned even at 4e6 samples; the 3-sigma window absorbs
/// that honestly.
#[test]
fn sampled_moment_ladder_tracks_the_factorial_law() {
    let orders = [1u32, 2, 3];
    for n in 1..=5u32 {
        let set = sample_compound_intensity(n, 1.0, 4_000_000, 1000 + n as u64).unwrap();
        let m = set.empirical_moments(&orders);
        for (i, &q) in orders.iter().enumerate() {
            let want = moment(q, n, 1.0).unwrap();
            let z = (m.values[i] - want).abs() / m.stderrs[i];
            assert!(
                z < 3.0,
                "q={q}, n={n}: sampled {} +- {} vs {want} (z = {z})",
                m.values[i],
                m.stderrs[i]
            );
        }
    }
}

/// As the modulator dwell shrinks the modulated source approaches a
/// two-stage cascade whose premodulation bandwidth is the dwell
/// equivalent 2pi/dwell; at every dwell the exact description is the
/// triangular hold correlation times the final-stage factor.
#[test]
fn im_trace_converges_to_the_cascade_as_dwell_shrinks() {
    let bw = 1.0;
    let tau_c = 2.0 * std::f64::consts::PI;
    let dt = tau_c / 100.0;
    let duration = 12_000.0 * tau_c;
    let dwells = [tau_c, tau_c / 5.0, tau_c / 25.0];
    let mut rms_vs_equivalent = Vec::new();
    for (i, &dwell) in dwells.iter().enumerate() {
        let trace =
            im_equivalent_trace(1, bw, duration, dt, 128, Some(dwell), 40 + i as u64).unwrap();
        let curve = correlate(&trace, 2.0 * tau_c, 21).unwrap();

        // exact model: triangular hold correlation times the stage factor
        let tri_dev = rms(curve.lags().iter().zip(curve.values()).map(|(&l, &v)| {
            let hold = 1.0 + (1.0 - l.abs() / dwell).max(0.0);
            let s = pseudothermal::analytics::sinc(bw * l / 2.0);
            v - hold * (1.0 + s * s)
        }));
        assert!(tri_dev < 0.06, "dwell {dwell}: rms vs hold model {tri_dev}");

        // dwell-equivalent cascade
        let eq_spec = CascadeSpec::all_rotating(&[2.0 * std::f64::consts::PI / dwell, bw]).unwrap();
        rms_vs_equivalent.push(rms(curve.lags().iter().zip(curve.values()).map(|(&l, &v)| {
            v - g2_cascade(l, &eq_spec).unwrap()
        })));
    }
    assert!(
        rms_vs_equivalent[2] < rms_vs_equivalent[1] + 0.01
            && rms_vs_equivalent[1] < rms_vs_equivalent[0] + 0.01,
        "no convergence toward the equivalent cascade: {rms_vs_equivalent:?}"
    );
    assert!(
        rms_vs_equivalent[2] < 0.06,
        "finest dwell still far from the cascade: {}",
        rms_vs_equivalent[2]
    );
}
