//! Physical parameter bundles and unit conversions.
//!
//! Internally every angular frequency is stored in rad/ns and every time in
//! ns. Tables in the source literature quote frequencies in (2π)GHz, so the
//! [`CavityParams::from_paper_units`] constructor takes that convention and
//! multiplies by 2π; note it takes the *full* population decay 2γ of the
//! excited state and stores the coherence decay γ = (2γ)/2.

use crate::error::{Error, Result};
use alloc::format;
use core::f64::consts::TAU;

/// Atom-cavity parameter bundle: coupling g, waveguide rate κ_ex, intrinsic
/// loss κ_i, atomic coherence decay γ, and the mode-mode backscattering h.
/// All in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Single-photon Rabi frequency g (rad/ns).
    pub g: f64,
    /// Cavity-waveguide coupling rate κ_ex (rad/ns).
    pub kappa_ex: f64,
    /// Intrinsic cavity loss rate κ_i (rad/ns).
    pub kappa_i: f64,
    /// Atomic coherence decay rate γ (rad/ns); the excited state population
    /// decays at 2γ.
    pub gamma: f64,
    /// Backscattering coupling h between the two circulating modes (rad/ns).
    pub backscatter_h: f64,
}

impl CavityParams {
    /// Build from rad/ns values, validating the sign constraints.
    pub fn new(g: f64, kappa_ex: f64, kappa_i: f64, gamma: f64) -> Result<Self> {
        let p = CavityParams { g, kappa_ex, kappa_i, gamma, backscatter_h: 0.0 };
        p.validate()?;
        Ok(p)
    }

    /// Build from the (2π)GHz table convention. `two_gamma_ghz` is the full
    /// excited-state decay rate 2γ as listed in the tables.
    pub fn from_paper_units(
        g_ghz: f64,
        kex_ghz: f64,
        ki_ghz: f64,
        two_gamma_ghz: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("g", g_ghz),
            ("kappa_ex", kex_ghz),
            ("kappa_i", ki_ghz),
            ("two_gamma", two_gamma_ghz),
        ] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        Self::new(
            TAU * g_ghz,
            TAU * kex_ghz,
            TAU * ki_ghz,
            TAU * (two_gamma_ghz / 2.0),
        )
    }

    /// Back-conversion to the (2π)GHz convention:
    /// `(g, κ_ex, κ_i, 2γ)`.
    pub fn to_paper_units(&self) -> (f64, f64, f64, f64) {
        (
            self.g / TAU,
            self.kappa_ex / TAU,
            self.kappa_i / TAU,
            2.0 * self.gamma / TAU,
        )
    }

    fn validate(&self) -> Result<()> {
        if !self.g.is_finite() || self.g <= 0.0 {
            return Err(Error::Domain(format!("g must be > 0, got {}", self.g)));
        }
        if !self.kappa_ex.is_finite() || self.kappa_ex <= 0.0 {
            return Err(Error::Domain(format!(
                "kappa_ex must be > 0, got {}",
                self.kappa_ex
            )));
        }
        if !self.kappa_i.is_finite() || self.kappa_i < 0.0 {
            return Err(Error::Domain(format!(
                "kappa_i must be >= 0, got {}",
                self.kappa_i
            )));
        }
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return Err(Error::Domain(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !self.backscatter_h.is_finite() || self.backscatter_h < 0.0 {
            return Err(Error::Domain(format!(
                "backscatter_h must be >= 0, got {}",
                self.backscatter_h
            )));
        }
        Ok(())
    }

    /// Total cavity linewidth κ = κ_ex + κ_i.
    pub fn kappa(&self) -> f64 {
        self.kappa_ex + self.kappa_i
    }

    /// Cooperativity C = g²/(κγ).
    pub fn cooperativity(&self) -> f64 {
        self.g * self.g / (self.kappa() * self.gamma)
    }

    /// Copy with a different backscattering coupling.
    pub fn with_backscatter(self, h: f64) -> Result<Self> {
        let p = CavityParams { backscatter_h: h, ..self };
        p.validate()?;
        Ok(p)
    }
}

/// Cooperativity C = g²/(κγ) of a parameter set.
pub fn cooperativity(params: &CavityParams) -> f64 {
    params.cooperativity()
}

/// Detunings of the control laser (Δ₁), the cavity (Δ₂), and the photon
/// offset from cavity resonance (Δp), all in rad/ns.
///
/// Synthesized pulses assume Δ₁ = Δ₂ + Δp; error-model sweeps may shift Δ₁
/// and Δ₂ together, which preserves the two-photon detuning Δ₁ − Δ₂.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Detunings {
    pub delta1: f64,
    pub delta2: f64,
    pub delta_p: f64,
}

impl Detunings {
    /// Detunings for a photon at offset Δp with cavity detuning Δ₂, with the
    /// control laser on the synthesis condition Δ₁ = Δ₂ + Δp.
    pub fn for_photon(delta_p: f64, delta2: f64) -> Self {
        Detunings { delta1: delta2 + delta_p, delta2, delta_p }
    }

    /// Whether Δ₁ = Δ₂ + Δp holds to within `tol` (rad/ns).
    pub fn is_synthesis_consistent(&self, tol: f64) -> bool {
        (self.delta1 - self.delta2 - self.delta_p).abs() <= tol
    }

    /// Both one-photon detunings shifted by a common Doppler offset Δd; the
    /// two-photon detuning Δ₁ − Δ₂ is preserved and Δp is left untouched.
    pub fn doppler_shifted(&self, delta_d: f64) -> Self {
        Detunings {
            delta1: self.delta1 + delta_d,
            delta2: self.delta2 + delta_d,
            delta_p: self.delta_p,
        }
    }
}
