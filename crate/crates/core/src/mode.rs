//! Normalized temporal photon modes h(t) with analytic derivatives.

use crate::error::{Error, Result};
use crate::grid::{trapz, TimeGrid};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
// rustc 1.97 falsely flags this as unused; the no_std build requires it.
#[allow(unused_imports)]
use num_traits::Float;

/// Number of standard deviations kept on each side of the Gaussian mode
/// before renormalizing on [0, T].
const GAUSS_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    SineSquared,
    Gaussian,
    Sampled,
}

/// A real, non-negative temporal mode with ∫₀ᵀ h(t)² dt = 1, together with
/// its first two derivatives.
#[derive(Debug, Clone)]
pub struct ModeShape {
    kind: ModeKind,
    duration: f64,
    // Sampled-mode data; empty for the analytic kinds.
    samples: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl ModeShape {
    /// h(t) ∝ sin²(πt/T), vanishing at both endpoints.
    pub fn sine_squared(duration: f64) -> Result<Self> {
        check_duration(duration)?;
        Ok(ModeShape {
            kind: ModeKind::SineSquared,
            duration,
            samples: Vec::new(),
            d1: Vec::new(),
            d2: Vec::new(),
        })
    }

    /// Gaussian centered at T/2, truncated at ±4σ (σ = T/8) and renormalized
    /// on [0, T]. The synthesis equations need finite support, so the tails
    /// are cut rather than wrapped.
    pub fn gaussian(duration: f64) -> Result<Self> {
        check_duration(duration)?;
        Ok(ModeShape {
            kind: ModeKind::Gaussian,
            duration,
            samples: Vec::new(),
            d1: Vec::new(),
            d2: Vec::new(),
        })
    }

    /// A user-supplied mode sampled uniformly on [0, T]. The samples are
    /// renormalized so ∫h² dt = 1; derivatives come from central
    /// differences. End values must not exceed 10⁻⁶ of the maximum.
    pub fn sampled(duration: f64, samples: &[f64]) -> Result<Self> {
        check_duration(duration)?;
        if samples.len() < 8 {
            return Err(Error::Domain(format!(
                "sampled mode needs >= 8 samples, got {}",
                samples.len()
            )));
        }
        let max = samples.iter().cloned().fold(0.0, f64::max);
        if samples.iter().any(|&v| !v.is_finite() || v < 0.0) || max <= 0.0 {
            return Err(Error::Domain(
                "sampled mode must be non-negative, finite, and not all zero".into(),
            ));
        }
        let ends = samples[0].max(samples[samples.len() - 1]);
        if ends > 1e-6 * max {
            return Err(Error::Domain(format!(
                "sampled mode endpoints ({ends:e}) exceed 1e-6 of the peak ({max:e})"
            )));
        }
        let dt = duration / (samples.len() - 1) as f64;
        let sq: Vec<f64> = samples.iter().map(|v| v * v).collect();
        let norm = trapz(&sq, dt).sqrt();
        let samples: Vec<f64> = samples.iter().map(|v| v / norm).collect();
        let n = samples.len();
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        for k in 0..n {
            let (lo, hi) = (k.saturating_sub(1), (k + 1).min(n - 1));
            d1.push((samples[hi] - samples[lo]) / (dt * (hi - lo) as f64));
        }
        for k in 0..n {
            if k == 0 || k == n - 1 {
                d2.push(0.0);
            } else {
                d2.push((samples[k + 1] - 2.0 * samples[k] + samples[k - 1]) / (dt * dt));
            }
        }
        Ok(ModeShape { kind: ModeKind::Sampled, duration, samples, d1, d2 })
    }

    pub fn kind(&self) -> ModeKind {
        self.kind
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    fn gauss_sigma(&self) -> f64 {
        self.duration / (2.0 * GAUSS_SIGMAS)
    }

    /// L²-normalization constant for the truncated Gaussian:
    /// ∫₀ᵀ exp(−(t−T/2)²/σ²) dt = σ√π·erf(4).
    fn gauss_norm(&self) -> f64 {
        let s = self.gauss_sigma();
        1.0 / (s * PI.sqrt() * libm::erf(GAUSS_SIGMAS)).sqrt()
    }

    /// Mode amplitude h(t); zero outside [0, T].
    pub fn h(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.duration {
            return 0.0;
        }
        match self.kind {
            ModeKind::SineSquared => {
                let a = (8.0 / (3.0 * self.duration)).sqrt();
                let s = (PI * t / self.duration).sin();
                a * s * s
            }
            ModeKind::Gaussian => {
                let s = self.gauss_sigma();
                let x = t - 0.5 * self.duration;
                self.gauss_norm() * (-x * x / (2.0 * s * s)).exp()
            }
            ModeKind::Sampled => self.interp(&self.samples, t),
        }
    }

    /// First derivative ḣ(t).
    pub fn h_dot(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.duration {
            return 0.0;
        }
        match self.kind {
            ModeKind::SineSquared => {
                let a = (8.0 / (3.0 * self.duration)).sqrt();
                let w = PI / self.duration;
                a * w * (2.0 * w * t).sin()
            }
            ModeKind::Gaussian => {
                let s2 = self.gauss_sigma().powi(2);
                -(t - 0.5 * self.duration) / s2 * self.h(t)
            }
            ModeKind::Sampled => self.interp(&self.d1, t),
        }
    }

    /// Second derivative ḧ(t).
    pub fn h_ddot(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.duration {
            return 0.0;
        }
        match self.kind {
            ModeKind::SineSquared => {
                let a = (8.0 / (3.0 * self.duration)).sqrt();
                let w = PI / self.duration;
                2.0 * a * w * w * (2.0 * w * t).cos()
            }
            ModeKind::Gaussian => {
                let s2 = self.gauss_sigma().powi(2);
                let x = t - 0.5 * self.duration;
                (x * x / (s2 * s2) - 1.0 / s2) * self.h(t)
            }
            ModeKind::Sampled => self.interp(&self.d2, t),
        }
    }

    fn interp(&self, data: &[f64], t: f64) -> f64 {
        let dt = self.duration / (data.len() - 1) as f64;
        let x = (t / dt).clamp(0.0, (data.len() - 1) as f64);
        let k = (x as usize).min(data.len() - 2);
        let frac = x - k as f64;
        data[k] * (1.0 - frac) + data[k + 1] * frac
    }

    /// ∫₀ᵀ h² dt evaluated by grid quadrature; 1 up to quadrature error.
    pub fn norm_sq(&self, n: usize) -> f64 {
        let grid = TimeGrid::new(self.duration, n).expect("valid mode duration");
        let hsq = grid.sample(|t| {
            let v = self.h(t);
            v * v
        });
        trapz(&hsq, grid.dt())
    }
}

fn check_duration(duration: f64) -> Result<()> {
    if !duration.is_finite() || duration <= 0.0 {
        return Err(Error::Domain(format!(
            "mode duration must be positive and finite, got {duration}"
        )));
    }
    Ok(())
}
