//! Sampled control pulses Ω₀(t)e^{iφ₀(t)}.

use crate::error::{Error, Result};
use crate::grid::{trapz, TimeGrid};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

/// Which synthesis route produced a pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseCase {
    /// Exact synthesis from the amplitude equations of motion.
    Exact,
    /// Adiabatic closed form at cavity resonance (Δp = 0).
    AdiabaticCase1,
    /// Adiabatic closed form at the shifted operating point (Δp ≠ 0).
    AdiabaticCase2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseMeta {
    pub case: PulseCase,
    /// Target retrieval efficiency the pulse was synthesized for.
    pub eta_r: f64,
    /// Photon frequency offset Δp (rad/ns) the pulse addresses.
    pub delta_p: f64,
    /// True when the amplitude was clamped near t = T because the residual
    /// source population hit its floor.
    pub truncated: bool,
}

/// A control pulse sampled on a uniform grid over [0, T]: non-negative
/// amplitudes Ω₀(tₖ) (rad/ns) and unwrapped phases φ₀(tₖ) (rad).
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPulse {
    grid: TimeGrid,
    omega0: Vec<f64>,
    phi0: Vec<f64>,
    meta: PulseMeta,
    f0t: f64,
}

impl ControlPulse {
    pub fn new(grid: TimeGrid, omega0: Vec<f64>, phi0: Vec<f64>, meta: PulseMeta) -> Result<Self> {
        if omega0.len() != grid.len() || phi0.len() != grid.len() {
            return Err(Error::GridMismatch { left: omega0.len(), right: grid.len() });
        }
        if let Some(bad) = omega0.iter().find(|&&w| !w.is_finite() || w < 0.0) {
            return Err(Error::Domain(format!("pulse amplitude must be >= 0, got {bad}")));
        }
        if let Some(w) = phi0.windows(2).find(|w| (w[1] - w[0]).abs() > PI) {
            return Err(Error::Domain(format!(
                "pulse phase jumps by {} > \u{3c0} between samples; unwrap first",
                (w[1] - w[0]).abs()
            )));
        }
        let sq: Vec<f64> = omega0.iter().map(|w| w * w).collect();
        let f0t = trapz(&sq, grid.dt());
        if !f0t.is_finite() {
            return Err(Error::Domain("pulse energy is not finite".into()));
        }
        Ok(ControlPulse { grid, omega0, phi0, meta, f0t })
    }

    /// The all-zero pulse (η_r = 0: nothing retrieved).
    pub fn zero(grid: TimeGrid, case: PulseCase, delta_p: f64) -> Self {
        let n = grid.len();
        ControlPulse {
            grid,
            omega0: alloc::vec![0.0; n],
            phi0: alloc::vec![0.0; n],
            meta: PulseMeta { case, eta_r: 0.0, delta_p, truncated: false },
            f0t: 0.0,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn duration(&self) -> f64 {
        self.grid.duration()
    }

    pub fn omega0(&self) -> &[f64] {
        &self.omega0
    }

    pub fn phi0(&self) -> &[f64] {
        &self.phi0
    }

    pub fn meta(&self) -> &PulseMeta {
        &self.meta
    }

    /// Pulse energy f(0, T) = ∫ Ω₀² dt (rad²/ns).
    pub fn f0t(&self) -> f64 {
        self.f0t
    }

    /// Largest sampled amplitude (rad/ns).
    pub fn peak(&self) -> f64 {
        self.omega0.iter().cloned().fold(0.0, f64::max)
    }

    /// Linearly interpolated amplitude at time `t`; zero outside [0, T].
    pub fn omega_at(&self, t: f64) -> f64 {
        self.lerp(&self.omega0, t, 0.0)
    }

    /// Linearly interpolated phase at `t`; clamped to the end values.
    pub fn phi_at(&self, t: f64) -> f64 {
        let end = if t <= 0.0 { self.phi0[0] } else { self.phi0[self.phi0.len() - 1] };
        self.lerp(&self.phi0, t, end)
    }

    fn lerp(&self, data: &[f64], t: f64, outside: f64) -> f64 {
        if t < 0.0 || t > self.grid.duration() {
            return outside;
        }
        let x = t / self.grid.dt();
        let k = (x as usize).min(data.len() - 2);
        let frac = x - k as f64;
        data[k] * (1.0 - frac) + data[k + 1] * frac
    }
}

/// Time-reversed pulse for absorption: Ω₀′(t) = Ω₀(T−t) and
/// φ₀′(t) = −φ₀(T−t) + π. The sign flip −Ω₀ of the reversal rule is carried
/// as the extra π so the amplitude stays non-negative.
pub fn time_reverse(pulse: &ControlPulse) -> ControlPulse {
    let omega0: Vec<f64> = pulse.omega0.iter().rev().cloned().collect();
    let phi0: Vec<f64> = pulse.phi0.iter().rev().map(|p| PI - p).collect();
    ControlPulse {
        grid: pulse.grid.clone(),
        omega0,
        phi0,
        meta: pulse.meta,
        f0t: pulse.f0t,
    }
}

/// Unwrap a sequence of phases so no step exceeds π in magnitude.
pub fn unwrap_phases(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut offset = 0.0;
    let mut prev = match raw.first() {
        Some(&p) => p,
        None => return out,
    };
    out.push(prev);
    for &p in &raw[1..] {
        let mut step = p - prev;
        while step > PI {
            step -= TAU;
            offset -= TAU;
        }
        while step < -PI {
            step += TAU;
            offset += TAU;
        }
        out.push(p + offset);
        prev = p;
    }
    out
}
