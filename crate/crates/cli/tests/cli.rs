//! Behavior of the installed binary: exit codes, file outputs, and
//! run-to-run determinism.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pseudothermal"))
}

fn write_small_config(path: &Path) {
    // three equal rotating stages, short trace, coarse grid: fast everywhere
    let text = r#"
seed = 11

[[cascade.stages]]
bandwidth_rad_s = 1.0e6
rotating = true

[[cascade.stages]]
bandwidth_rad_s = 1.0e6
rotating = true

[[cascade.stages]]
bandwidth_rad_s = 1.0e6
rotating = true

[simulation]
duration_s = 1.3e-3
dt_s = 2.0e-7
modes = 64
mc_realizations = 2000

[grid]
max_lag_s = 2.0e-5
n_lags = 11
"#;
    std::fs::write(path, text).unwrap();
}

#[test]
fn analytic_three_stage_curve_peaks_at_eight() {
    let dir = std::env::temp_dir().join("ptl_cli_analytic");
    let _ = std::fs::remove_dir_all(&dir);
    let cfg = std::env::temp_dir().join("ptl_cli_analytic.toml");
    write_small_config(&cfg);
    let status = bin()
        .args(["analytic", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let curve =
        pseudothermal::G2Curve::load_csv(&dir.join("g2_analytic.csv")).unwrap();
    assert_eq!(curve.value_at(0.0).unwrap(), 8.0);
    let text = std::fs::read_to_string(dir.join("g2_analytic.csv")).unwrap();
    assert!(text.starts_with("# config_hash=0x"), "missing header line");
}

#[test]
fn config_errors_exit_with_code_two() {
    let cfg = std::env::temp_dir().join("ptl_cli_bad.toml");
    std::fs::write(&cfg, "seed = 1\n[detection]\nsplit_ratio = 0.0\n").unwrap();
    let out = bin()
        .args(["analytic", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("detection.split_ratio"), "{stderr}");
}

#[test]
fn missing_input_exits_with_code_three() {
    let out = bin()
        .args(["fit", "--input", "/nonexistent/curve.csv", "--model", "single"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = std::env::temp_dir().join("ptl_cli_det.toml");
    write_small_config(&cfg);
    let mut outputs = Vec::new();
    for (dir_name, threads) in [("ptl_cli_det_run1", "1"), ("ptl_cli_det_run2", "4")] {
        let dir = std::env::temp_dir().join(dir_name);
        let _ = std::fs::remove_dir_all(&dir);
        let status = bin()
            .args(["cascade", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&dir)
            .env("RAYON_NUM_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(dir.join("g2_cascade_sim.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "same seed produced different bytes");
}

#[test]
fn binary_payloads_round_trip_through_the_cli() {
    let cfg_path = std::env::temp_dir().join("ptl_cli_binary.toml");
    let text = r#"
seed = 21

[[cascade.stages]]
bandwidth_rad_s = 1.0e6
rotating = true

[simulation]
duration_s = 1.3e-3
dt_s = 2.0e-7
modes = 64

[detection]
mean_rate_cps = 4.0e5
bin_width_s = 3.0e-7
max_lag_s = 1.2e-5

[fit]
baseline_lo_s = 0.9e-5
baseline_hi_s = 1.2e-5

[grid]
max_lag_s = 1.5e-5
n_lags = 11

[outputs]
write_trace = true
write_tags = true
"#;
    std::fs::write(&cfg_path, text).unwrap();

    let bin_dir = std::env::temp_dir().join("ptl_cli_binary_out");
    let _ = std::fs::remove_dir_all(&bin_dir);
    let status = bin()
        .args(["cascade", "--format", "binary", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&bin_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let from_binary = pseudothermal::IntensityTrace::load_binary(&bin_dir.join("trace.bin")).unwrap();

    let csv_dir = std::env::temp_dir().join("ptl_cli_csv_out");
    let _ = std::fs::remove_dir_all(&csv_dir);
    let status = bin()
        .args(["cascade", "--format", "csv", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&csv_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let from_csv = pseudothermal::IntensityTrace::load_csv(&csv_dir.join("trace.csv")).unwrap();
    assert_eq!(from_binary.dt(), from_csv.dt());
    assert_eq!(from_binary.samples(), from_csv.samples());

    let status = bin()
        .args(["detect", "--format", "binary", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&bin_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let mut f = std::fs::File::open(bin_dir.join("tags.bin")).unwrap();
    let (s1, s2) = pseudothermal::detection::read_timetags_binary(&mut f).unwrap();
    assert!(!s1.is_empty() && !s2.is_empty());
}

#[test]
fn paths_mc_and_fit_chain_runs() {
    let cfg = std::env::temp_dir().join("ptl_cli_chain.toml");
    write_small_config(&cfg);
    let dir = std::env::temp_dir().join("ptl_cli_chain");
    let _ = std::fs::remove_dir_all(&dir);
    let status = bin()
        .args(["paths-mc", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let status = bin()
        .args(["fit", "--model", "product-3", "--input"])
        .arg(dir.join("g2_pathmc.csv"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let fit_text = std::fs::read_to_string(dir.join("fit.txt")).unwrap();
    assert!(fit_text.contains("model: product-3"), "{fit_text}");
    assert!(dir.join("residuals.csv").exists());
}
