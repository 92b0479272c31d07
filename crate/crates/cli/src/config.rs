//! Experiment configuration: a single TOML file with nested sections.
//!
//! Every field has a default; grid, detection, and fit windows marked
//! "auto" (absent) are derived from the cascade's coherence times. The
//! seed fully determines all stochastic outputs. Command-line flags
//! override file values, which override defaults.

use pseudothermal::{CascadeSpec, Error as CoreError, SpectralStage};
use serde::{Deserialize, Serialize};

/// paper-scale two-stage defaults: coherence times 2.15 us and 1.08 us
const DEFAULT_BANDWIDTH_1: f64 = 2.922_431_223_445_284e6;
const DEFAULT_BANDWIDTH_2: f64 = 5.817_764_173_314_43e6;
/// 780 nm optical carrier
const DEFAULT_CENTRAL_FREQUENCY: f64 = 2.414_661_893_343_3e15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageConfig {
    pub bandwidth_rad_s: f64,
    pub rotating: bool,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig {
            bandwidth_rad_s: DEFAULT_BANDWIDTH_1,
            rotating: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CascadeSection {
    pub stages: Vec<StageConfig>,
    pub central_frequency_rad_s: f64,
}

impl Default for CascadeSection {
    fn default() -> Self {
        CascadeSection {
            stages: vec![
                StageConfig {
                    bandwidth_rad_s: DEFAULT_BANDWIDTH_1,
                    rotating: true,
                },
                StageConfig {
                    bandwidth_rad_s: DEFAULT_BANDWIDTH_2,
                    rotating: true,
                },
            ],
            central_frequency_rad_s: DEFAULT_CENTRAL_FREQUENCY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    /// Trace length; absent means 12000 of the longest coherence time.
    pub duration_s: Option<f64>,
    /// Sample interval; absent means 1/60 of the shortest coherence time.
    pub dt_s: Option<f64>,
    /// Random modes per synthesized stage field.
    pub modes: usize,
    /// Realizations per lag point for the path Monte Carlo.
    pub mc_realizations: u64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            duration_s: None,
            dt_s: None,
            modes: 256,
            mc_realizations: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionSection {
    /// Photon rate of the full beam before the splitter (counts/s).
    /// The default is far above the historical few-kc/s regime so the
    /// coincidence histogram converges in minutes of simulated time;
    /// all normalized quantities are rate-invariant.
    pub mean_rate_cps: f64,
    /// Probability that an event routes to channel 1.
    pub split_ratio: f64,
    pub dead_time_s: f64,
    /// Dark counts per detector (counts/s).
    pub dark_rate_cps: f64,
    /// Histogram bin; absent means 1/20 of the shortest coherence time.
    pub bin_width_s: Option<f64>,
    /// Histogram half-span; absent means 10 of the longest coherence time.
    pub max_lag_s: Option<f64>,
}

impl Default for DetectionSection {
    fn default() -> Self {
        DetectionSection {
            mean_rate_cps: 3.0e6,
            split_ratio: 0.5,
            dead_time_s: 0.0,
            dark_rate_cps: 0.0,
            bin_width_s: None,
            max_lag_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Lag span of analytic / Monte Carlo / correlation curves; absent
    /// means 3 of the longest coherence time.
    pub max_lag_s: Option<f64>,
    /// Points on the symmetric lag grid (odd).
    pub n_lags: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            max_lag_s: None,
            n_lags: 41,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    /// "auto" (product over rotating stages, single when one), "single",
    /// or "product-N".
    pub model: String,
    /// Background window |lag| bounds; absent means [8, 10] of the
    /// longest coherence time.
    pub baseline_lo_s: Option<f64>,
    pub baseline_hi_s: Option<f64>,
}

impl Default for FitSection {
    fn default() -> Self {
        FitSection {
            model: "auto".into(),
            baseline_lo_s: None,
            baseline_hi_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputsSection {
    pub dir: String,
    /// "csv" or "binary" for trace and tag payloads (curves are CSV).
    pub format: String,
    /// Also write the synthesized intensity trace (large files).
    pub write_trace: bool,
    /// Also write the photon time tags.
    pub write_tags: bool,
}

impl Default for OutputsSection {
    fn default() -> Self {
        OutputsSection {
            dir: "out".into(),
            format: "csv".into(),
            write_trace: false,
            write_tags: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub cascade: CascadeSection,
    pub simulation: SimulationSection,
    pub detection: DetectionSection,
    pub grid: GridSection,
    pub fit: FitSection,
    pub outputs: OutputsSection,
}

/// A configuration error names the offending field.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// FNV-1a hash of the canonical serialized form; stamped into every
    /// text output header together with the seed.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.to_toml().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
        h
    }

    pub fn header_comment(&self) -> String {
        format!("config_hash=0x{:016x} seed={}", self.hash(), self.seed)
    }

    pub fn cascade_spec(&self) -> Result<CascadeSpec, ConfigError> {
        let stages = self
            .cascade
            .stages
            .iter()
            .map(|s| SpectralStage {
                bandwidth: s.bandwidth_rad_s,
                rotating: s.rotating,
            })
            .collect();
        CascadeSpec::new(stages, self.cascade.central_frequency_rad_s)
            .map_err(|e| ConfigError(format!("cascade: {e}")))
    }

    /// Validate and derive every auto field.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let spec = self.cascade_spec()?;
        let field = |name: &str, cond: bool, msg: String| {
            if cond {
                Ok(())
            } else {
                Err(ConfigError(format!("{name}: {msg}")))
            }
        };
        let tc_max = spec.max_coherence_time();
        let tc_min = spec.min_coherence_time();
        let need_tc = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| {
                ConfigError(format!(
                    "{name}: no value given and no rotating stage to derive it from"
                ))
            })
        };

        let duration = match self.simulation.duration_s {
            Some(v) => v,
            None => 12_000.0 * need_tc("simulation.duration_s", tc_max)?,
        };
        field(
            "simulation.duration_s",
            duration > 0.0 && duration.is_finite(),
            format!("must be > 0, got {duration}"),
        )?;
        let dt = match self.simulation.dt_s {
            Some(v) => v,
            None => need_tc("simulation.dt_s", tc_min)? / 60.0,
        };
        field("simulation.dt_s", dt > 0.0 && dt < duration, format!("must be in (0, duration), got {dt}"))?;
        field(
            "simulation.modes",
            self.simulation.modes >= 1,
            "must be at least 1".into(),
        )?;
        field(
            "simulation.mc_realizations",
            self.simulation.mc_realizations >= 1000,
            "must be at least 1000".into(),
        )?;
        field(
            "detection.mean_rate_cps",
            self.detection.mean_rate_cps > 0.0,
            "must be > 0".into(),
        )?;
        field(
            "detection.split_ratio",
            self.detection.split_ratio > 0.0 && self.detection.split_ratio < 1.0,
            "must lie strictly between 0 and 1".into(),
        )?;
        field(
            "detection.dead_time_s",
            self.detection.dead_time_s >= 0.0,
            "must be non-negative".into(),
        )?;
        field(
            "detection.dark_rate_cps",
            self.detection.dark_rate_cps >= 0.0,
            "must be non-negative".into(),
        )?;
        let bin_width = match self.detection.bin_width_s {
            Some(v) => v,
            None => need_tc("detection.bin_width_s", tc_min)? / 20.0,
        };
        field("detection.bin_width_s", bin_width > 0.0, format!("must be > 0, got {bin_width}"))?;
        let max_lag_hist = match self.detection.max_lag_s {
            Some(v) => v,
            None => 10.0 * need_tc("detection.max_lag_s", tc_max)?,
        };
        field(
            "detection.max_lag_s",
            max_lag_hist > bin_width,
            format!("must exceed the bin width, got {max_lag_hist}"),
        )?;
        let grid_max_lag = match self.grid.max_lag_s {
            Some(v) => v,
            None => 3.0 * need_tc("grid.max_lag_s", tc_max)?,
        };
        field("grid.max_lag_s", grid_max_lag > 0.0, format!("must be > 0, got {grid_max_lag}"))?;
        field(
            "grid.n_lags",
            self.grid.n_lags >= 3 && self.grid.n_lags % 2 == 1,
            "must be an odd count >= 3".into(),
        )?;
        let baseline_lo = match self.fit.baseline_lo_s {
            Some(v) => v,
            None => 8.0 * need_tc("fit.baseline_lo_s", tc_max)?,
        };
        let baseline_hi = match self.fit.baseline_hi_s {
            Some(v) => v,
            None => 10.0 * need_tc("fit.baseline_hi_s", tc_max)?,
        };
        field(
            "fit.baseline_lo_s",
            baseline_lo >= 0.0 && baseline_hi > baseline_lo,
            format!("baseline window must satisfy 0 <= lo < hi, got ({baseline_lo}, {baseline_hi})"),
        )?;
        field(
            "fit.baseline_hi_s",
            baseline_hi <= max_lag_hist,
            format!("baseline window must fit inside the histogram span {max_lag_hist}"),
        )?;
        let fit_model = match self.fit.model.as_str() {
            "auto" => {
                let n = spec.n_rotating().max(1);
                if n == 1 {
                    pseudothermal::FitModel::Single
                } else {
                    pseudothermal::FitModel::Product(n)
                }
            }
            other => pseudothermal::FitModel::parse(other)
                .map_err(|e| ConfigError(format!("fit.model: {e}")))?,
        };
        let binary = match self.outputs.format.as_str() {
            "csv" => false,
            "binary" => true,
            other => {
                return Err(ConfigError(format!(
                    "outputs.format: expected 'csv' or 'binary', got '{other}'"
                )))
            }
        };
        Ok(Resolved {
            spec,
            duration,
            dt,
            modes: self.simulation.modes,
            mc_realizations: self.simulation.mc_realizations,
            mean_rate: self.detection.mean_rate_cps,
            split_ratio: self.detection.split_ratio,
            dead_time: self.detection.dead_time_s,
            dark_rate: self.detection.dark_rate_cps,
            bin_width,
            max_lag_hist,
            grid_max_lag,
            n_lags: self.grid.n_lags,
            baseline: (baseline_lo, baseline_hi),
            fit_model,
            binary,
        })
    }
}

/// Fully derived run parameters.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub spec: CascadeSpec,
    pub duration: f64,
    pub dt: f64,
    pub modes: usize,
    pub mc_realizations: u64,
    pub mean_rate: f64,
    pub split_ratio: f64,
    pub dead_time: f64,
    pub dark_rate: f64,
    pub bin_width: f64,
    pub max_lag_hist: f64,
    pub grid_max_lag: f64,
    pub n_lags: usize,
    pub baseline: (f64, f64),
    pub fit_model: pseudothermal::FitModel,
    pub binary: bool,
}

impl From<CoreError> for ConfigError {
    fn from(e: CoreError) -> Self {
        ConfigError(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_resolves() {
        let cfg = ExperimentConfig::default();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.spec.n_rotating(), 2);
        assert!(r.duration > 0.02 && r.duration < 0.03);
        assert_eq!(r.fit_model, pseudothermal::FitModel::Product(2));
    }

    #[test]
    fn toml_round_trip_is_identity() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
        // and once more through the serializer
        assert_eq!(text, back.to_toml());
    }

    #[test]
    fn partial_files_take_defaults() {
        let cfg = ExperimentConfig::from_toml("seed = 7\n[detection]\ndark_rate_cps = 100.0\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.detection.dark_rate_cps, 100.0);
        assert_eq!(cfg.detection.mean_rate_cps, 3.0e6);
        assert_eq!(cfg.cascade.stages.len(), 2);
    }

    #[test]
    fn field_errors_name_the_field() {
        let mut cfg = ExperimentConfig::default();
        cfg.detection.split_ratio = 1.5;
        let err = cfg.resolve().unwrap_err();
        assert!(err.to_string().contains("detection.split_ratio"), "{err}");

        let mut cfg = ExperimentConfig::default();
        cfg.grid.n_lags = 10;
        let err = cfg.resolve().unwrap_err();
        assert!(err.to_string().contains("grid.n_lags"), "{err}");

        let err = ExperimentConfig::from_toml("nonsense_field = 3").unwrap_err();
        assert!(err.to_string().contains("nonsense_field"), "{err}");
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn all_static_cascade_needs_explicit_windows() {
        let mut cfg = ExperimentConfig::default();
        for s in &mut cfg.cascade.stages {
            s.rotating = false;
        }
        let err = cfg.resolve().unwrap_err();
        assert!(err.to_string().contains("no rotating stage"), "{err}");
    }
}
