//! Phase-shift-free passive beamforming for reconfigurable intelligent
//! surfaces (RIS).
//!
//! The surface applies a fixed phase of π on every element and beamforms
//! purely by switching elements on or off. This crate contains:
//!
//! - [`channel`]: surface geometry, sinc spatial correlation, Rayleigh
//!   channel draws, Von Mises phase errors and the link budget.
//! - [`beamforming`]: the two-stage on/off selection, the classical
//!   two-level phase-shift scheme and the reflection phase selection
//!   heuristic, all under the amplitude-phase coupling model.
//! - [`theory`]: closed forms and bounds (triangular phase density,
//!   activation probability quadrature, resource outage bounds, log-normal
//!   outage and ergodic rate bound).
//! - [`montecarlo`]: the seeded, schedule-invariant trial engine and the
//!   estimators built on it.

pub mod beamforming;
pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod quadrature;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
