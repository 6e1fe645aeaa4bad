//! Fisher-information position error bounds for downlink localization with
//! reconfigurable intelligent surfaces (RIS) mounted on a wall.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: 2D scene, delays, angles, virtual anchor, incidence point.
//! - [`waveform`]: OFDM parameters and the delay-information kernel `S(Δ)`.
//! - [`channel`]: complex path gains, steering vectors and path sets.
//! - [`fim`]: 2×2 position FIM, PEB and resolvability diagnostics.
//! - [`riscontrol`]: closed-form phase profiles and RIS subset selection.
//! - [`sweep`]: grid maps, CDFs and information directions.
//! - [`config`] and [`cli`]: run configuration and command front end.

pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod fim;
pub mod geometry;
pub mod riscontrol;
pub mod sweep;
pub mod validate;
pub mod waveform;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
