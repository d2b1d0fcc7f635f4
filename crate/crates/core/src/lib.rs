//! Numerical toolbox for single-photon generation, absorption, and
//! atom-photon gates in a driven three-level atom coupled to a one-sided
//! microcavity.
//!
//! The crate is organized around a small set of shared types
//! ([`params::CavityParams`], [`mode::ModeShape`], [`pulse::ControlPulse`],
//! [`dynamics::Trajectory`]) and the operations that connect them:
//!
//! - [`synth`] computes the control pulse Ω₀(t)e^{iφ₀(t)} that retrieves a
//!   photon into a prescribed temporal mode, exactly or in the adiabatic
//!   limit, together with the closed-form efficiency expressions.
//! - [`dynamics`] integrates the driven amplitude equations for retrieval
//!   and absorption and extracts efficiencies and fidelities.
//! - [`scatter`] and [`gates`] cover waveguide transmission, pulse
//!   filtering, finite-pulse gate fidelities, and the controlled-phase gate
//!   sequences for chiral and non-chiral cavities.
//! - [`error_models`] sweeps the warm-atom error channels (coupling drift,
//!   common Doppler shift) and fits the resulting infidelity curves.
//! - [`multiplex`] analyzes active and passive source multiplexing.
//! - [`register`] and [`protocol`] provide a dense state-vector engine with
//!   exhaustive measurement-branch enumeration and the cluster-state,
//!   photon-photon-gate, and key-distribution circuits built on it.
//!
//! Angular frequencies are stored in rad/ns and times in ns throughout;
//! constructors taking the (2π)GHz convention are provided on the parameter
//! types so tabulated values can be typed directly.
//!
//! The crate is `no_std` (with `alloc`) so the numerical core can be reused
//! from embedded or wasm hosts; all I/O lives in the companion CLI crate.
//!
//! # Example
//!
//! Synthesize a retrieval pulse for a built-in preset, drive the
//! three-level dynamics with it, and confirm the photon comes out in the
//! requested mode:
//!
//! ```
//! use cavqed_core::dynamics::{integrate_retrieval, retrieval_metrics, DriveSpec};
//! use cavqed_core::mode::ModeShape;
//! use cavqed_core::ode::Tolerances;
//! use cavqed_core::presets;
//! use cavqed_core::synth::synthesize_exact;
//!
//! let preset = presets::builtin("cavity5")?;
//! let params = preset.params();
//! let detunings = preset.detunings()?;
//! let mode = ModeShape::sine_squared(preset.t_ns)?;
//!
//! let synth = synthesize_exact(&params, &mode, &detunings, 0.979, 2048)?;
//! let drive = DriveSpec::retrieval(synth.pulse, detunings);
//! let trajectory = integrate_retrieval(&params, &drive, Tolerances::default())?;
//! let metrics = retrieval_metrics(&trajectory, &mode, detunings.delta_p)?;
//!
//! assert!((metrics.eta_r - 0.979).abs() < 1e-3);
//! assert!(metrics.fidelity_f <= metrics.eta_r);
//! # Ok::<(), cavqed_core::Error>(())
//! ```

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod error_models;
pub mod dynamics;
pub mod fft;
pub mod gates;
pub mod grid;
pub mod mode;
pub mod multiplex;
pub mod ode;
pub mod params;
pub mod presets;
pub mod protocol;
pub mod pulse;
pub mod register;
pub mod scatter;
pub mod synth;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
