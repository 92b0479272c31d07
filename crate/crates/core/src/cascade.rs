//! Description of a cascaded pseudothermal source: an ordered set of
//! randomizing stages, each one a ground-glass diffuser that is either
//! rotating (randomizing, with a spectral bandwidth) or static.

use crate::error::{Error, Result};

/// One randomizing stage of the cascade.
///
/// A rotating stage scatters light into a flat spectrum of full width
/// `bandwidth` (angular frequency, rad/s). A static stage leaves the beam
/// untouched and must behave identically to its absence everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralStage {
    /// Full spectral width Δω in rad/s. Must be > 0 when rotating.
    pub bandwidth: f64,
    /// Whether the diffuser is rotating (randomizing).
    pub rotating: bool,
}

impl SpectralStage {
    /// A rotating stage with the given full bandwidth (rad/s).
    pub fn rotating(bandwidth: f64) -> Self {
        SpectralStage {
            bandwidth,
            rotating: true,
        }
    }

    /// A static (non-randomizing) stage.
    pub fn fixed() -> Self {
        SpectralStage {
            bandwidth: 0.0,
            rotating: false,
        }
    }

    /// Coherence time convention used throughout the crate: τ_c = 2π/Δω,
    /// the first zero of the sinc correlation factor.
    pub fn coherence_time(&self) -> Option<f64> {
        if self.rotating {
            Some(2.0 * std::f64::consts::PI / self.bandwidth)
        } else {
            None
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        if self.rotating && !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::Domain(format!(
                "stage {index}: rotating stage requires bandwidth > 0, got {}",
                self.bandwidth
            )));
        }
        Ok(())
    }
}

/// Ordered cascade of stages plus the optical central frequency.
///
/// The central frequency only matters to the photon-path Monte Carlo,
/// where stage frequencies are drawn around it; every analytic quantity
/// is baseband and independent of it.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSpec {
    pub stages: Vec<SpectralStage>,
    /// Optical central frequency ω₀ in rad/s.
    pub central_frequency: f64,
}

impl CascadeSpec {
    pub fn new(stages: Vec<SpectralStage>, central_frequency: f64) -> Result<Self> {
        if !(central_frequency >= 0.0 && central_frequency.is_finite()) {
            return Err(Error::Domain(format!(
                "central frequency must be finite and non-negative, got {central_frequency}"
            )));
        }
        for (i, s) in stages.iter().enumerate() {
            s.validate(i)?;
        }
        Ok(CascadeSpec {
            stages,
            central_frequency,
        })
    }

    /// Cascade of rotating stages with the given bandwidths, baseband.
    pub fn all_rotating(bandwidths: &[f64]) -> Result<Self> {
        Self::new(
            bandwidths.iter().map(|&b| SpectralStage::rotating(b)).collect(),
            0.0,
        )
    }

    /// Number of rotating stages (the effective cascade depth).
    pub fn n_rotating(&self) -> usize {
        self.stages.iter().filter(|s| s.rotating).count()
    }

    /// Iterator over the rotating stages in cascade order.
    pub fn rotating_stages(&self) -> impl Iterator<Item = &SpectralStage> {
        self.stages.iter().filter(|s| s.rotating)
    }

    /// Longest coherence time among rotating stages (none if all static).
    pub fn max_coherence_time(&self) -> Option<f64> {
        self.rotating_stages()
            .filter_map(|s| s.coherence_time())
            .fold(None, |acc, t| Some(acc.map_or(t, |a: f64| a.max(t))))
    }

    /// Shortest coherence time among rotating stages (none if all static).
    pub fn min_coherence_time(&self) -> Option<f64> {
        self.rotating_stages()
            .filter_map(|s| s.coherence_time())
            .fold(None, |acc, t| Some(acc.map_or(t, |a: f64| a.min(t))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotating_stage_requires_positive_bandwidth() {
        assert!(CascadeSpec::new(vec![SpectralStage::rotating(0.0)], 0.0).is_err());
        assert!(CascadeSpec::new(vec![SpectralStage::rotating(-1.0)], 0.0).is_err());
        assert!(CascadeSpec::new(vec![SpectralStage::fixed()], 0.0).is_ok());
    }

    #[test]
    fn effective_depth_counts_only_rotating_stages() {
        let spec = CascadeSpec::new(
            vec![
                SpectralStage::rotating(1e6),
                SpectralStage::fixed(),
                SpectralStage::rotating(2e6),
            ],
            0.0,
        )
        .unwrap();
        assert_eq!(spec.n_rotating(), 2);
        let tc = 2.0 * std::f64::consts::PI;
        assert!((spec.max_coherence_time().unwrap() - tc / 1e6).abs() < 1e-18);
        assert!((spec.min_coherence_time().unwrap() - tc / 2e6).abs() < 1e-18);
    }

    #[test]
    fn all_static_cascade_has_no_coherence_time() {
        let spec = CascadeSpec::new(vec![SpectralStage::fixed(); 3], 0.0).unwrap();
        assert_eq!(spec.n_rotating(), 0);
        assert!(spec.max_coherence_time().is_none());
    }
}
