//! Simulation and analysis toolkit for cascaded pseudothermal light.
//!
//! A laser beam randomized by a chain of rotating ground-glass diffusers
//! (with single-coherence-area filtering between stages) develops strong
//! photon bunching: N randomizing stages push the zero-lag second-order
//! coherence to g²(0) = 2^N, with a lag profile given by a product of
//! 1 + sinc² factors, one per stage. This crate reproduces that physics
//! by three independent routes and provides the analysis chain used to
//! measure it:
//!
//! - [`analytics`] — closed forms: g²(τ) curves, the 2^N law, intensity
//!   densities (exponential, K₀, iterated compounds) and moments.
//! - [`pathmc`] — two-photon path-interference Monte Carlo over the 2^N
//!   indistinguishable detection alternatives, including the
//!   distinguishable-path limit and the term-census bookkeeping.
//! - [`speckle`] — classical stochastic simulation: synthesized stage
//!   fields, cascaded intensity traces, direct correlation, compound
//!   intensity sampling, and the intensity-modulator equivalent source.
//! - [`detection`] — virtual Hanbury Brown–Twiss chain: Poisson photon
//!   time tags on two channels, coincidence histograms, background
//!   normalization.
//! - [`fitting`] — nonlinear least squares of measured curves against the
//!   single and product sinc² models.
//!
//! Every stochastic routine is deterministic given its seed, independent
//! of worker count.

pub mod analytics;
pub mod bessel;
pub mod cascade;
pub mod curve;
pub mod detection;
pub mod error;
pub mod fitting;
pub mod pathmc;
pub mod quad;
pub mod rng;
pub mod speckle;
pub mod stats;
pub mod trace;

pub use cascade::{CascadeSpec, SpectralStage};
pub use curve::{symmetric_lag_grid, G2Curve};
pub use detection::{CoincidenceHistogram, TimeTagStream};
pub use error::{Error, Result};
pub use fitting::{FitModel, FitResult};
pub use trace::IntensityTrace;
