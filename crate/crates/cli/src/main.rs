//! Command-line harness for the pseudothermal light toolkit.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for
//! numerical, fit, or I/O failures during a run.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pseudothermal_cli::config::ExperimentConfig;
use pseudothermal_cli::pipeline;

#[derive(Parser)]
#[command(
    name = "pseudothermal",
    about = "Cascaded pseudothermal light: analytic curves, photon-path Monte Carlo, stochastic simulation, virtual HBT detection, and model fitting",
    version
)]
struct Cli {
    /// TOML configuration file (defaults apply when absent)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed override (dominates the config file)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory override
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Payload format override for traces and tags
    #[arg(long, global = true, value_parser = ["csv", "binary"])]
    format: Option<String>,

    #[command(subcommand)]
    mode: Mode,
}

#[derive(Subcommand)]
enum Mode {
    /// Exact g2 curve from the closed forms
    Analytic,
    /// Two-photon path-interference Monte Carlo curve
    PathsMc,
    /// Stochastic cascade simulation and direct correlation
    Cascade,
    /// Full detection chain: time tags, coincidences, normalized curve
    Detect,
    /// Fit a stored curve CSV
    Fit {
        /// Curve file (lag_s,value,stderr)
        #[arg(long)]
        input: PathBuf,
        /// Fit model: single | product-N (config default otherwise)
        #[arg(long)]
        model: Option<String>,
    },
    /// The three-scenario measurement comparison with product-line check
    Fig4,
    /// Cross-mode consistency check (analytic vs Monte Carlo vs simulation)
    Crosscheck,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, pseudothermal_cli::config::ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(fmt) = &cli.format {
        cfg.outputs.format = fmt.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let resolved = match cfg.resolve() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let out = pipeline::out_dir(&cfg, cli.out.as_deref());

    let run = || -> Result<bool, pseudothermal::Error> {
        match &cli.mode {
            Mode::Analytic => {
                let curve = pipeline::run_analytic(&cfg, &resolved, &out)?;
                println!(
                    "analytic: {} points, g2(0) = {:.6}",
                    curve.len(),
                    curve.value_at(0.0)?
                );
            }
            Mode::PathsMc => {
                let curve = pipeline::run_paths_mc(&cfg, &resolved, &out)?;
                println!(
                    "paths-mc: {} points x {} realizations, g2(0) = {:.4}",
                    curve.len(),
                    resolved.mc_realizations,
                    curve.value_at(0.0)?
                );
            }
            Mode::Cascade => {
                let (trace, curve) = pipeline::run_cascade(&cfg, &resolved, &out)?;
                println!(
                    "cascade: {} samples over {:.3e} s, g2(0) = {:.4}",
                    trace.len(),
                    trace.duration(),
                    curve.value_at(0.0)?
                );
            }
            Mode::Detect => {
                let (_, curve) = pipeline::run_detect(&cfg, &resolved, &out)?;
                println!("detect: normalized curve with {} bins", curve.len());
            }
            Mode::Fit { input, model } => {
                let fit_model = match model {
                    Some(m) => pseudothermal::FitModel::parse(m)?,
                    None => resolved.fit_model,
                };
                let fit = pipeline::run_fit(&cfg, fit_model, input, &out)?;
                println!(
                    "fit ({}): g2_zero = {:.4} +- {:.4}, residual rms = {:.3e}",
                    fit.model, fit.g2_zero, fit.g2_zero_stderr, fit.residual_rms
                );
            }
            Mode::Fig4 => {
                let result = pipeline::run_fig4(&cfg, &resolved, &out)?;
                for s in &result.scenarios {
                    println!(
                        "{}: g2_zero = {:.4} +- {:.4} ({})",
                        s.name, s.fit.g2_zero, s.fit.g2_zero_stderr, s.fit.model
                    );
                }
                println!(
                    "product check: rms_gap = {:.4e} (pooled stderr {:.4e})",
                    result.product_check.rms_gap, result.product_check.pooled_stderr
                );
            }
            Mode::Crosscheck => {
                let result = pipeline::run_crosscheck(&cfg, &resolved, &out)?;
                for (name, rms, pooled) in &result.pairs {
                    println!("{name}: rms = {rms:.4e}, pooled stderr = {pooled:.4e}");
                }
                println!("crosscheck: {}", if result.passed { "PASS" } else { "FAIL" });
                return Ok(result.passed);
            }
        }
        Ok(true)
    };

    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(3)
        }
    }
}
