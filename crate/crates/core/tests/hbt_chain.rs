//! End-to-end checks of the virtual HBT chain against the trace it
//! measures, and of the dark-count dilution law.

use pseudothermal::cascade::CascadeSpec;
use pseudothermal::detection::{coincidence_histogram, normalize_histogram, sample_timetags};
use pseudothermal::speckle::{cascade_intensity_trace, correlate};
use pseudothermal::G2Curve;

const BW_SLOW: f64 = 2.922_431_223_445_284e6;
const BW_FAST: f64 = 5.817_764_173_314_43e6;

/// Normalized curve of one full detection run over the given trace.
fn detect_curve(
    trace: &pseudothermal::IntensityTrace,
    mean_rate: f64,
    dark_rate: f64,
    tc_max: f64,
    tc_min: f64,
    seed: u64,
) -> G2Curve {
    let (s1, s2) = sample_timetags(trace, mean_rate, 0.5, 0.0, dark_rate, seed).unwrap();
    let hist = coincidence_histogram(&s1, &s2, tc_min / 20.0, 10.0 * tc_max).unwrap();
    normalize_histogram(&hist, (8.0 * tc_max, 10.0 * tc_max)).unwrap()
}

#[test]
fn tag_chain_agrees_with_direct_correlation() {
    let spec = CascadeSpec::all_rotating(&[1.0, 1.0 / 3.0]).unwrap();
    let tc_max = spec.max_coherence_time().unwrap();
    let tc_min = spec.min_coherence_time().unwrap();
    let dt = tc_min / 40.0;
    let trace = cascade_intensity_trace(&spec, 3000.0 * tc_max, dt, 192, 2718).unwrap();

    let direct = correlate(&trace, 3.2 * tc_max, 41).unwrap();
    let (s1, s2) = sample_timetags(&trace, 0.5, 0.5, 0.0, 0.0, 31415).unwrap();
    let hist = coincidence_histogram(&s1, &s2, tc_min / 20.0, 10.0 * tc_max).unwrap();
    let tagged = normalize_histogram(&hist, (8.0 * tc_max, 10.0 * tc_max)).unwrap();

    // compare on a 21-point grid inside both curves
    let grid = pseudothermal::curve::symmetric_lag_grid(3.0 * tc_max, 21).unwrap();
    let mut sq_dev = 0.0;
    let mut sq_pooled = 0.0;
    let mut worst_z: f64 = 0.0;
    for &lag in &grid {
        let a = direct.value_at(lag).unwrap();
        let b = tagged.value_at(lag).unwrap();
        let sa = nearest_err(&direct, lag);
        let sb = nearest_err(&tagged, lag);
        let pooled = (sa * sa + sb * sb).sqrt();
        sq_dev += (a - b) * (a - b);
        sq_pooled += pooled * pooled;
        worst_z = worst_z.max((a - b).abs() / pooled);
    }
    let rms_dev = (sq_dev / grid.len() as f64).sqrt();
    let rms_pooled = (sq_pooled / grid.len() as f64).sqrt();
    assert!(
        rms_dev <= 3.0 * rms_pooled,
        "tag chain rms deviation {rms_dev} vs pooled {rms_pooled}"
    );
    assert!(worst_z < 5.0, "worst pointwise z = {worst_z}");
}

fn nearest_err(curve: &G2Curve, lag: f64) -> f64 {
    let mut best = f64::MAX;
    let mut err = 0.0;
    for (i, &l) in curve.lags().iter().enumerate() {
        let d = (l - lag).abs();
        if d < best {
            best = d;
            err = curve.stderr()[i];
        }
    }
    err
}

#[test]
fn dark_counts_dilute_the_excess_quadratically() {
    let spec = CascadeSpec::all_rotating(&[BW_SLOW, BW_FAST]).unwrap();
    let tc_max = spec.max_coherence_time().unwrap();
    let tc_min = spec.min_coherence_time().unwrap();
    let dt = tc_min / 100.0;
    let duration = 8000.0 * tc_max;
    let mean_rate = 6.0e6;
    let trace = cascade_intensity_trace(&spec, duration, dt, 192, 99).unwrap();

    // the same trace feeds every run, so the speckle-realization noise
    // cancels in the dilution ratios
    let clean = detect_curve(&trace, mean_rate, 0.0, tc_max, tc_min, 1);
    let excess0 = clean.value_at(0.0).unwrap() - 1.0;
    assert!(
        excess0 > 2.6 && excess0 < 3.35,
        "two-stage peak excess {excess0} (peak-to-background {})",
        excess0 + 1.0
    );

    for (i, ds) in [0.1, 0.2, 0.5].into_iter().enumerate() {
        let dark_rate = ds * mean_rate * 0.5; // per detector
        let curve = detect_curve(&trace, mean_rate, dark_rate, tc_max, tc_min, 100 + i as u64);
        let excess = curve.value_at(0.0).unwrap() - 1.0;
        let got = excess / excess0;
        let want = (1.0 / (1.0 + ds)).powi(2);
        assert!(
            (got / want - 1.0).abs() < 0.05,
            "d/s = {ds}: dilution {got} vs (s/(s+d))^2 = {want}"
        );
    }
}
