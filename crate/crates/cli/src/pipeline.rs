//! Pipeline orchestration: each mode wires the library stages together,
//! writes its artifacts under the output directory, and returns the
//! computed objects so callers (and the test suites) can inspect them.
//!
//! Text outputs start with a `# config_hash=... seed=...` header line;
//! binary payloads follow their fixed layouts and carry no header.

use std::path::{Path, PathBuf};

use pseudothermal::analytics::g2_cascade_curve;
use pseudothermal::cascade::SpectralStage;
use pseudothermal::curve::symmetric_lag_grid;
use pseudothermal::detection::{
    coincidence_histogram, normalize_histogram, sample_timetags, save_timetags,
};
use pseudothermal::fitting::{fit_g2, product_curve_check, FitResult, ProductCheckReport};
use pseudothermal::pathmc::g2_mc_curve;
use pseudothermal::speckle::{cascade_intensity_trace, correlate};
use pseudothermal::{CascadeSpec, Error as CoreError, FitModel, G2Curve, IntensityTrace};

use crate::config::{ExperimentConfig, Resolved};

pub type PipeResult<T> = Result<T, CoreError>;

fn ensure_dir(dir: &Path) -> PipeResult<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

/// Exact curve from the closed forms.
pub fn run_analytic(cfg: &ExperimentConfig, r: &Resolved, out: &Path) -> PipeResult<G2Curve> {
    ensure_dir(out)?;
    let lags = symmetric_lag_grid(r.grid_max_lag, r.n_lags)?;
    let curve = g2_cascade_curve(&r.spec, &lags)?;
    curve.save_csv(&out.join("g2_analytic.csv"), Some(&cfg.header_comment()))?;
    Ok(curve)
}

/// Path-interference Monte Carlo over the lag grid.
pub fn run_paths_mc(cfg: &ExperimentConfig, r: &Resolved, out: &Path) -> PipeResult<G2Curve> {
    ensure_dir(out)?;
    let lags = symmetric_lag_grid(r.grid_max_lag, r.n_lags)?;
    let curve = g2_mc_curve(&r.spec, &lags, r.mc_realizations, cfg.seed)?;
    curve.save_csv(&out.join("g2_pathmc.csv"), Some(&cfg.header_comment()))?;
    Ok(curve)
}

/// Stochastic field simulation plus direct correlation.
pub fn run_cascade(
    cfg: &ExperimentConfig,
    r: &Resolved,
    out: &Path,
) -> PipeResult<(IntensityTrace, G2Curve)> {
    ensure_dir(out)?;
    let trace = cascade_intensity_trace(&r.spec, r.duration, r.dt, r.modes, cfg.seed)?;
    if cfg.outputs.write_trace {
        if r.binary {
            trace.save_binary(&out.join("trace.bin"))?;
        } else {
            trace.save_csv(&out.join("trace.csv"), Some(&cfg.header_comment()))?;
        }
    }
    let curve = correlate(&trace, r.grid_max_lag, r.n_lags)?;
    curve.save_csv(&out.join("g2_cascade_sim.csv"), Some(&cfg.header_comment()))?;
    Ok((trace, curve))
}

/// Full tag-level chain: trace, photodetection, histogram, normalization.
pub fn run_detect(
    cfg: &ExperimentConfig,
    r: &Resolved,
    out: &Path,
) -> PipeResult<(IntensityTrace, G2Curve)> {
    ensure_dir(out)?;
    let trace = cascade_intensity_trace(&r.spec, r.duration, r.dt, r.modes, cfg.seed)?;
    let (s1, s2) = sample_timetags(
        &trace,
        r.mean_rate,
        r.split_ratio,
        r.dead_time,
        r.dark_rate,
        cfg.seed,
    )?;
    if cfg.outputs.write_tags {
        let name = if r.binary { "tags.bin" } else { "tags.csv" };
        save_timetags(&s1, &s2, &out.join(name), r.binary, Some(&cfg.header_comment()))?;
    }
    let hist = coincidence_histogram(&s1, &s2, r.bin_width, r.max_lag_hist)?;
    {
        let mut w = std::io::BufWriter::new(std::fs::File::create(out.join("histogram.csv"))?);
        hist.write_csv(&mut w, Some(&cfg.header_comment()))?;
    }
    let curve = normalize_histogram(&hist, r.baseline)?;
    curve.save_csv(&out.join("g2_detected.csv"), Some(&cfg.header_comment()))?;
    Ok((trace, curve))
}

/// Fit a stored curve.
pub fn run_fit(
    cfg: &ExperimentConfig,
    model: FitModel,
    input: &Path,
    out: &Path,
) -> PipeResult<FitResult> {
    ensure_dir(out)?;
    let curve = G2Curve::load_csv(input)?;
    let fit = fit_g2(&curve, model, None)?;
    fit.save_text(&out.join("fit.txt"), Some(&cfg.header_comment()))?;
    let mut w = std::io::BufWriter::new(std::fs::File::create(out.join("residuals.csv"))?);
    fit.write_residuals_csv(&curve, &mut w, Some(&cfg.header_comment()))?;
    Ok(fit)
}

/// One complete measurement scenario of the three-panel comparison.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub name: &'static str,
    pub curve: G2Curve,
    pub fit: FitResult,
    /// Two-stage scenarios also carry the single-factor fit for
    /// comparison with the product fit.
    pub single_fit: Option<FitResult>,
}

/// The three-scenario comparison plus the product-line check.
#[derive(Debug)]
pub struct Fig4Result {
    pub scenarios: Vec<ScenarioResult>,
    pub product_check: ProductCheckReport,
}

/// Run the three two-stage scenarios (first stage randomizing, second
/// randomizing, both randomizing), fit each curve, and compare the
/// product of the single-stage fitted models against the measured
/// two-stage curve.
pub fn run_fig4(cfg: &ExperimentConfig, r: &Resolved, out: &Path) -> PipeResult<Fig4Result> {
    if r.spec.stages.len() != 2 || r.spec.n_rotating() != 2 {
        return Err(CoreError::Contract(format!(
            "the three-scenario comparison needs exactly two rotating stages, got {} stages ({} rotating)",
            r.spec.stages.len(),
            r.spec.n_rotating()
        )));
    }
    ensure_dir(out)?;
    let stage1 = r.spec.stages[0];
    let stage2 = r.spec.stages[1];
    let omega0 = r.spec.central_frequency;
    let specs = [
        ("a_stage2_only", CascadeSpec::new(vec![SpectralStage::fixed(), stage2], omega0)?),
        ("b_stage1_only", CascadeSpec::new(vec![stage1, SpectralStage::fixed()], omega0)?),
        ("c_both", CascadeSpec::new(vec![stage1, stage2], omega0)?),
    ];

    let mut scenarios = Vec::new();
    for (i, (name, spec)) in specs.into_iter().enumerate() {
        let sub = out.join(name);
        ensure_dir(&sub)?;
        let scenario_seed = cfg.seed.wrapping_add(i as u64);
        let trace = cascade_intensity_trace(&spec, r.duration, r.dt, r.modes, scenario_seed)?;
        let (s1, s2) = sample_timetags(
            &trace,
            r.mean_rate,
            r.split_ratio,
            r.dead_time,
            r.dark_rate,
            scenario_seed,
        )?;
        let hist = coincidence_histogram(&s1, &s2, r.bin_width, r.max_lag_hist)?;
        let curve = normalize_histogram(&hist, r.baseline)?;
        curve.save_csv(&sub.join("g2_detected.csv"), Some(&cfg.header_comment()))?;

        let n_rot = spec.n_rotating();
        let model = if n_rot <= 1 { FitModel::Single } else { FitModel::Product(n_rot) };
        let fit = fit_g2(&curve, model, None)?;
        fit.save_text(&sub.join("fit.txt"), Some(&cfg.header_comment()))?;
        let mut w = std::io::BufWriter::new(std::fs::File::create(sub.join("residuals.csv"))?);
        fit.write_residuals_csv(&curve, &mut w, Some(&cfg.header_comment()))?;

        // the two-stage panel is also fitted with the single model, the
        // form used for all three measured panels historically
        let single_fit = if n_rot > 1 {
            let sf = fit_g2(&curve, FitModel::Single, None)?;
            sf.save_text(&sub.join("fit_single.txt"), Some(&cfg.header_comment()))?;
            Some(sf)
        } else {
            None
        };
        scenarios.push(ScenarioResult {
            name,
            curve,
            fit,
            single_fit,
        });
    }

    // product-line check: product of the fitted single-stage models
    // evaluated on the two-stage grid, against the measured curve
    let grid = scenarios[2].curve.lags().to_vec();
    let model_a = scenarios[0].fit.curve(&grid)?;
    let model_b = scenarios[1].fit.curve(&grid)?;
    let product_check = product_curve_check(&model_a, &model_b, &scenarios[2].curve)?;
    {
        let mut w =
            std::io::BufWriter::new(std::fs::File::create(out.join("product_check.txt"))?);
        product_check.write_text(&mut w, Some(&cfg.header_comment()))?;
    }
    Ok(Fig4Result {
        scenarios,
        product_check,
    })
}

/// Cross-mode consistency report.
#[derive(Debug)]
pub struct CrosscheckResult {
    pub analytic: G2Curve,
    pub pathmc: G2Curve,
    pub cascade_sim: G2Curve,
    /// (pair name, rms deviation, rms pooled stderr)
    pub pairs: Vec<(String, f64, f64)>,
    pub passed: bool,
}

/// RMS deviation between a stochastic curve and the analytic reference
/// on the stochastic curve's own lags, with its pooled standard error.
fn rms_against_analytic(curve: &G2Curve, spec: &CascadeSpec) -> PipeResult<(f64, f64)> {
    let mut sq = 0.0;
    for (i, &lag) in curve.lags().iter().enumerate() {
        let want = pseudothermal::analytics::g2_cascade(lag, spec)?;
        sq += (curve.values()[i] - want).powi(2);
    }
    let rms = (sq / curve.len() as f64).sqrt();
    Ok((rms, curve.pooled_stderr()))
}

/// Run the analytic, path Monte Carlo, and field-simulation estimates of
/// the same cascade and verify they agree within three pooled standard
/// errors (RMS over the grid).
pub fn run_crosscheck(cfg: &ExperimentConfig, r: &Resolved, out: &Path) -> PipeResult<CrosscheckResult> {
    ensure_dir(out)?;
    let analytic = run_analytic(cfg, r, out)?;
    let pathmc = run_paths_mc(cfg, r, out)?;
    let (_, cascade_sim) = run_cascade(cfg, r, out)?;

    let mut pairs = Vec::new();
    let (rms_mc, pooled_mc) = rms_against_analytic(&pathmc, &r.spec)?;
    pairs.push(("pathmc_vs_analytic".to_string(), rms_mc, pooled_mc));
    let (rms_sim, pooled_sim) = rms_against_analytic(&cascade_sim, &r.spec)?;
    pairs.push(("cascade_sim_vs_analytic".to_string(), rms_sim, pooled_sim));
    let passed = pairs.iter().all(|(_, rms, pooled)| *rms <= 3.0 * *pooled);

    let mut report = String::new();
    report.push_str(&format!("# {}\n", cfg.header_comment()));
    for (name, rms, pooled) in &pairs {
        report.push_str(&format!(
            "{name}: rms_deviation = {rms:.6e}, rms_pooled_stderr = {pooled:.6e}, pass = {}\n",
            *rms <= 3.0 * *pooled
        ));
    }
    report.push_str(&format!("crosscheck: {}\n", if passed { "PASS" } else { "FAIL" }));
    std::fs::write(out.join("crosscheck.txt"), report)?;
    Ok(CrosscheckResult {
        analytic,
        pathmc,
        cascade_sim,
        pairs,
        passed,
    })
}

/// Output directory helper shared by the binary and the tests.
pub fn out_dir(cfg: &ExperimentConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&cfg.outputs.dir))
}
