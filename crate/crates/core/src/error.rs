//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter is outside its allowed domain.
    Domain(String),
    /// Requested retrieval efficiency is not reachable for these parameters.
    InfeasibleEfficiency { eta_r: f64, eta_max: f64 },
    /// The residual population ρ_ss fell below its floor before the
    /// truncation window; the control pulse diverges at `t_fail`.
    SynthesisDiverged { t_fail: f64 },
    /// The case-2 operating point requires κ² + γ² < 2g².
    Case2Infeasible { lhs: f64, rhs: f64 },
    /// Two sequences that must share a grid do not.
    GridMismatch { left: usize, right: usize },
    /// The sampling grid does not resolve the pulse bandwidth.
    Bandwidth(String),
    /// The adaptive integrator could not complete a step.
    Integrator(String),
    /// Least-squares system is rank deficient.
    FitRank,
    /// A register index is out of range or repeated.
    Register(String),
    /// A photon slot that must be vacuum carries amplitude.
    OccupiedSlot { slot: usize },
    /// Mis-formed preset file or unknown preset name.
    Preset(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "parameter domain error: {msg}"),
            Error::InfeasibleEfficiency { eta_r, eta_max } => write!(
                f,
                "requested efficiency {eta_r} is not below the maximum {eta_max}"
            ),
            Error::SynthesisDiverged { t_fail } => write!(
                f,
                "pulse synthesis diverged: residual population hit its floor at t = {t_fail} ns"
            ),
            Error::Case2Infeasible { lhs, rhs } => write!(
                f,
                "case-2 operating point undefined: κ²+γ² = {lhs} is not below 2g² = {rhs}"
            ),
            Error::GridMismatch { left, right } => {
                write!(f, "grid mismatch: {left} vs {right} samples")
            }
            Error::Bandwidth(msg) => write!(f, "bandwidth error: {msg}"),
            Error::Integrator(msg) => write!(f, "integrator error: {msg}"),
            Error::FitRank => write!(f, "least-squares fit is rank deficient"),
            Error::Register(msg) => write!(f, "register error: {msg}"),
            Error::OccupiedSlot { slot } => write!(
                f,
                "photon slot {slot} must be vacuum where the atom is in |1⟩"
            ),
            Error::Preset(msg) => write!(f, "preset error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
