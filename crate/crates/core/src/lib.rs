//! Crosstalk-induced degradation of a QKD channel in multicore fiber.
//!
//! * [`units`] – channel constants, crosstalk sources, dB conversions.
//! * [`noise`] – seeded Monte-Carlo phase noise and its closed-form damping.
//! * [`visibility`] – interferometer visibility and QBER under crosstalk.
//! * [`threshold`] / [`psr`] – key-loss thresholds, noise sweeps and
//!   phase stochastic resonance.
//! * [`bpm`] – beam propagation through multicore fiber and inter-core
//!   crosstalk with and without trenches.
//! * [`config`] / [`run`] – JSON run configurations and the CSV, SVG and
//!   PGM artifacts they produce.

pub mod bpm;
pub mod config;
pub mod error;
pub mod noise;
pub mod plot;
pub mod psr;
pub mod roots;
pub mod run;
pub mod special;
pub mod threshold;
pub mod units;
pub mod visibility;

pub use error::{BpmError, ModelError};
