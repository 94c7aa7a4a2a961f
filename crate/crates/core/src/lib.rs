//! Coincidence-rate simulation of a Hong-Ou-Mandel interferometer whose signal
//! arm passes through a Fabry-Perot etalon.
//!
//! The etalon turns the signal photon into a train of wavepackets spaced by
//! the cavity round-trip time `T`. Scanning the idler delay then produces
//! recurrent fourth-order interference features at `τ_j = jT/2`, whose dip or
//! peak character is set by the inter-pulse phase `δφ`.
//!
//! - [`spectral`]: pump, phase matching, filters, etalon, joint spectral amplitude.
//! - [`engine`]: the coincidence rate by 2D quadrature, direct or FFT-accelerated.
//! - [`feynman`]: the comb-state picture that counts interfering firing schemes.
//! - [`oracles`]: independent reference computations used for verification.
//! - [`cli`], [`config`], [`output`], [`verify`]: the command-line front end.

pub mod chirpz;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod feynman;
pub mod grid;
pub mod oracles;
pub mod output;
pub mod setup;
pub mod spectral;
pub mod units;
pub mod verify;

pub use engine::{CoincidenceEngine, CoincidenceTrace, ConvergenceReport, EnginePath, TraceSample};
pub use error::{Error, Result};
pub use grid::{DelaySweep, FrequencyGrid};
pub use setup::{EtalonSpec, FilterSpec, OpticalSetup, PhaseMatchingModel, PhaseMatchingSpec, PumpSpec};
